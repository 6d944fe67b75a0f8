#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sa_lab/diagnostics.hpp"
#include "sa_lab/rm_engine.hpp"

using namespace sa_lab;
using fixtures::rate_verdicts;

namespace {

ConditionReport report(const std::string& id, Verdict v) {
    ConditionReport r;
    r.id = id;
    r.verdict = v;
    return r;
}

constexpr Verdict H = Verdict::holds, F = Verdict::fails;

std::vector<double> partial_sums(const TimeGrid& g, double (*term)(double)) {
    std::vector<double> s(g.points(), 0.0);
    for (std::size_t i = 1; i < s.size(); ++i) s[i] = s[i - 1] + term(g.t(i)) * g.dK(i);
    return s;
}

const ConditionReport& find(const std::vector<ConditionReport>& rs, const std::string& id) {
    for (const auto& r : rs)
        if (r.id == id) return r;
    throw std::out_of_range(id);
}

std::vector<ConditionReport> all_reports(const RmRun& run) {
    auto f = FieldView::of(run);
    std::vector<ConditionReport> out{check_drift_sign(f, default_sign_u_grid()), check_qc_bound(f)};
    for (auto& r : check_group_I(f)) out.push_back(r);
    for (auto& r : check_group_II(f)) out.push_back(r);
    for (auto& r : check_S1_S2(f, epsilon_u_grid(0.01))) out.push_back(r);
    return out;
}

RmRun gw_run(double theta, std::size_t n, std::uint64_t seed = 0) {
    auto m = std::make_shared<const ModelSpec>(build_model({"galton_watson", {{"theta", theta}}}));
    return simulate(m, share(TimeGrid::discrete(n)), seed);
}

}  // namespace

TEST(Classifier, ConvergentDivergentAndFlat) {
    auto g = TimeGrid::discrete(100000);
    EXPECT_EQ(classify_series(partial_sums(g, [](double t) { return 1.0 / (t * t); }), g.times()).cls,
              SeriesClass::finite);
    EXPECT_EQ(classify_series(partial_sums(g, [](double t) { return 1.0 / t; }), g.times()).cls,
              SeriesClass::divergent);
    EXPECT_EQ(classify_series(partial_sums(g, [](double) { return 1.0; }), g.times()).cls, SeriesClass::divergent);
    EXPECT_EQ(classify_series(std::vector<double>(g.points(), 0.0), g.times()).cls, SeriesClass::finite);
}

// Σ 1/(t log t) grows by a shrinking but comparable amount per decade.
TEST(Classifier, DecadeRatioCatchesLogLog) {
    auto g = TimeGrid::discrete(1000000);
    auto s = partial_sums(g, [](double t) { return 1.0 / (t * std::log(t + 1.0)); });
    auto v = classify_series(s, g.times());
    EXPECT_EQ(v.cls, SeriesClass::divergent);
    ASSERT_TRUE(v.witness);
    EXPECT_GT(*v.witness, 100000u);
}

TEST(Classifier, StricterThresholdsNeverTurnDivergentIntoFinite) {
    auto g = TimeGrid::discrete(100000);
    auto s = partial_sums(g, [](double t) { return std::pow(t, -1.3); });
    ClassifierThresholds loose{0.05, 0.2, 0.5}, tight{0.001, 0.2, 0.5};
    EXPECT_EQ(classify_series(s, g.times(), loose).cls, SeriesClass::finite);
    EXPECT_NE(classify_series(s, g.times(), tight).cls, SeriesClass::finite);
}

TEST(DriftSign, LinearHoldsAndReversedFails) {
    auto g = TimeGrid::uniform(10.0, 0.1);
    auto lin = build_model({"linear_standard", {}});
    EXPECT_EQ(check_drift_sign(lin, default_sign_u_grid(), g).verdict, H);

    ModelSpec bad = lin;
    bad.drift = [](const StepContext&, double u) { return u; };
    auto r = check_drift_sign(bad, default_sign_u_grid(), g);
    EXPECT_EQ(r.verdict, F);
    ASSERT_TRUE(r.witness_step && r.witness_u);
    EXPECT_EQ(*r.witness_step, 1u);
    EXPECT_EQ(*r.witness_u, default_sign_u_grid().front());

    EXPECT_THROW(check_drift_sign(lin, {0.0, 1.0}, g), ValidationError);
}

TEST(DriftSign, NanIsInconclusiveWithLocation) {
    auto g = TimeGrid::uniform(1.0, 0.1);
    ModelSpec m = build_model({"linear_standard", {}});
    m.drift = [](const StepContext& c, double u) { return c.step == 3 && u > 5.0 ? NAN : -u; };
    auto r = check_drift_sign(m, default_sign_u_grid(), g);
    EXPECT_EQ(r.verdict, Verdict::inconclusive);
    EXPECT_EQ(*r.witness_step, 3u);
}

TEST(DriftSign, GaltonWatsonHolds) {
    auto run = gw_run(1.0, 200);
    EXPECT_EQ(check_drift_sign(FieldView::of(run), default_sign_u_grid()).verdict, H);
    EXPECT_THROW(FieldView::of(*run.model, *run.grid), ValidationError);
}

TEST(GroupSplit, GaltonWatsonSubcriticalAllHold) {
    auto rs = all_reports(gw_run(0.5, 1000));
    for (const char* id : {"I_i1", "I_i2", "I_ii", "II_i", "II_ii"}) EXPECT_EQ(find(rs, id).verdict, H) << id;
}

TEST(GroupSplit, GaltonWatsonSupercriticalBreaksI) {
    auto rs = all_reports(gw_run(2.0, 1000));
    const auto& i2 = find(rs, "I_i2");
    EXPECT_EQ(i2.verdict, F);
    ASSERT_TRUE(i2.witness_step);
    EXPECT_EQ(find(rs, "II_i").verdict, H);
    EXPECT_EQ(find(rs, "II_ii").verdict, H);
}

TEST(GroupSplit, DeterministicSplitAcrossSeeds) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        EXPECT_EQ(find(all_reports(gw_run(2.0, 1000, s)), "I_i2").verdict, F);
        EXPECT_EQ(find(all_reports(gw_run(0.5, 1000, s)), "I_i2").verdict, H);
    }
}

TEST(GroupI, NoJumpsMeansI2Trivial) {
    auto m = build_model({"deterministic_regression", {}});
    auto rs = check_group_I(FieldView::of(m, TimeGrid::uniform(100.0, 0.1)));
    EXPECT_EQ(find(rs, "I_i2").verdict, H);
    EXPECT_EQ(find(rs, "I_i2").monitored_final, 0.0);
}

TEST(GroupII, ZeroDriftCannotDiverge) {
    auto m = fixtures::linear_fixture([](const StepContext&) { return 0.0; },
                                      [](const StepContext& c) { return 1.0 + fixtures::right(c); });
    auto rs = check_group_II(FieldView::of(m, TimeGrid::discrete(1000)));
    EXPECT_EQ(find(rs, "II_ii").verdict, F);
}

// b γ ΔK < 2: [V⁻ + V⁺]⁺ ≡ 0 on every jump.
TEST(GroupII, SmallLinearGainOnJumps) {
    auto m = build_model({"custom", {{"b", 1.5}, {"p", 1.0}}});
    auto rs = check_group_II(FieldView::of(m, TimeGrid::discrete(1000)));
    EXPECT_EQ(find(rs, "II_i").verdict, H);
    EXPECT_EQ(find(rs, "II_i").monitored_final, 0.0);
    EXPECT_EQ(find(rs, "II_ii").verdict, H);
}

TEST(S1S2, LinearEnvelopeIsTight) {
    auto m = build_model({"linear_standard", {}});
    auto g = TimeGrid::uniform(1000.0, 0.1);
    auto rs = check_S1_S2(m, epsilon_u_grid(0.01), g);
    EXPECT_EQ(find(rs, "S1_i1").verdict, H);
    EXPECT_NEAR(find(rs, "S1_i1").monitored_final, find(rs, "S1_ii").monitored_final, 1e-9);
    EXPECT_EQ(find(rs, "S1_ii").verdict, H);
}

TEST(S1S2, ZeroLowerEnvelopeFails) {
    auto m = fixtures::linear_fixture([](const StepContext&) { return 0.0; },
                                      [](const StepContext&) { return 1.0; });
    auto rs = check_S1_S2(m, epsilon_u_grid(0.01), TimeGrid::uniform(100.0, 0.1));
    EXPECT_EQ(find(rs, "S1_ii").verdict, F);
}

// Jump steps with G̃ΔK ≡ 3 (δ ≡ 1): (S.2)(i) sums G̃ and fails, the negative
// part in (S.2)(ii) vanishes. With G̃ΔK ≡ 1 (δ ≡ −1) both hold.
TEST(S1S2, OvershootingJumps) {
    auto g = TimeGrid::discrete(10000);
    auto over = fixtures::linear_fixture([](const StepContext&) { return 3.0; }, [](const StepContext&) { return 1.0; });
    auto rs = check_S1_S2(over, epsilon_u_grid(0.01), g);
    EXPECT_EQ(find(rs, "S2_i").verdict, F);
    EXPECT_EQ(find(rs, "S2_ii").verdict, F);
    auto unit = fixtures::linear_fixture([](const StepContext&) { return 1.0; }, [](const StepContext&) { return 1.0; });
    rs = check_S1_S2(unit, epsilon_u_grid(0.01), g);
    EXPECT_EQ(find(rs, "S2_i").verdict, H);
    EXPECT_EQ(find(rs, "S2_ii").verdict, H);
}

TEST(Audit, ImplicationsConsistentOnRegistry) {
    std::vector<RmRun> runs{gw_run(0.5, 1000), gw_run(2.0, 1000)};
    for (const char* n : {"linear_standard", "rm_slow_gain", "deterministic_regression", "custom"}) {
        auto m = std::make_shared<const ModelSpec>(build_model({n, {}}));
        runs.push_back(simulate(m, share(TimeGrid::uniform(1000.0, 0.5)), 1));
    }
    for (const auto& run : runs)
        for (const auto& a : audit_implications(all_reports(run)))
            EXPECT_TRUE(a.consistent()) << run.model->id.name << ": " << a.premise << " => " << a.conclusion;
}

TEST(Audit, DetectsInconsistency) {
    auto a = report("S1_i1", H), b = report("I_i2", F);
    auto r = audit_implication({a, b}, "S1", "I");
    EXPECT_TRUE(r.premise_holds);
    EXPECT_FALSE(r.conclusion_holds);
    EXPECT_FALSE(r.consistent());
}

TEST(Reports, FailsAlwaysCarryWitness) {
    std::vector<std::vector<ConditionReport>> sets{all_reports(gw_run(2.0, 1000)), all_reports(gw_run(0.5, 1000))};
    auto geo = TimeGrid::geometric(1e7, 0.01, 1e9);
    sets.push_back(rate_verdicts(fixtures::example_e1(), geo, 0.9).reports);
    sets.push_back(rate_verdicts(fixtures::example_e3(), TimeGrid::discrete(1000000), 0.5).reports);
    for (const auto& rs : sets)
        for (const auto& r : rs)
            if (r.verdict == F) {
                EXPECT_TRUE(r.witness_step || r.witness_u) << r.id;
            }
}

TEST(RateFixtures, E1LimitHoldsButBoundednessFails) {
    auto geo = TimeGrid::geometric(1e7, 0.01, 1e9);
    auto v = rate_verdicts(fixtures::example_e1(), geo, 0.2);
    EXPECT_EQ(v["R_2_2_21"], H);
    EXPECT_EQ(v["a_tilde"], F);
    EXPECT_EQ(v["b_tilde"], H);
    EXPECT_EQ(v["c_tilde"], H);
    EXPECT_EQ(v["R_2_2_4"], H);
    EXPECT_EQ(rate_verdicts(fixtures::example_e1(), geo, 0.9)["R_2_2_4"], F);
}

TEST(RateFixtures, E2AlternatingGain) {
    auto v = rate_verdicts(fixtures::example_e2(), TimeGrid::discrete(1000000), 0.4);
    EXPECT_EQ(v["a_tilde"], H);
    EXPECT_EQ(v["bc_tilde"], H);
    EXPECT_EQ(v["R_2_2_21"], F);
}

TEST(RateFixtures, E3LogCorrection) {
    auto g = TimeGrid::discrete(1000000);
    auto v = rate_verdicts(fixtures::example_e3(), g, 0.4);
    EXPECT_EQ(v["R_2_2_21"], H);
    EXPECT_EQ(v["a_tilde"], H);
    EXPECT_EQ(v["b_tilde"], H);
    EXPECT_EQ(v["c_tilde"], H);
    EXPECT_EQ(v["bc_tilde"], F);
    EXPECT_EQ(rate_verdicts(fixtures::example_e3(), g, 0.5)["R_2_2_21"], F);
}

TEST(RateFixtures, E4InverseCorrection) {
    auto g = TimeGrid::discrete(1000000);
    EXPECT_EQ(rate_verdicts(fixtures::example_e4(), g, 0.5)["R_2_2_21"], H);
    auto v = rate_verdicts(fixtures::example_e4(), g, 0.4);
    EXPECT_EQ(v["a_tilde"], H);
    EXPECT_EQ(v["b_tilde"], H);
    EXPECT_EQ(v["c_tilde"], H);
    EXPECT_EQ(v["bc_tilde"], F);
}

TEST(RateFixtures, E5GeometricNormalizer) {
    auto v = rate_verdicts(fixtures::example_e5(), TimeGrid::discrete(500), 0.4);
    for (const auto& r : v.reports) EXPECT_EQ(r.verdict, H) << r.id;
}

TEST(RateConditions, DeltaRangeValidated) {
    auto m = fixtures::example_e4();
    auto g = TimeGrid::discrete(10);
    EXPECT_THROW(rate_verdicts(m, g, 0.0), ValidationError);
    EXPECT_THROW(rate_verdicts(m, g, 0.6, 0.5), ValidationError);
    EXPECT_THROW(rate_verdicts(m, g, 0.5, 1.5), ValidationError);
}

TEST(RateMonitor, DecreasesForLinearModel) {
    auto m = std::make_shared<const ModelSpec>(build_model({"linear_standard", {}}));
    auto g = share(TimeGrid::uniform(1000.0, 0.01));
    int ok = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto run = simulate(m, g, 5, s);
        ok += rate_monitor_verdict(rate_monitor(run, gamma_path(run), 0.5)).verdict == H;
    }
    EXPECT_GE(ok, 15);
}

TEST(RateMonitor, DivergedRunFails) {
    ModelSpec m = build_model({"custom", {}});
    m.drift = [](const StepContext&, double u) { return 10.0 * u; };
    auto run = simulate(m, TimeGrid::uniform(50.0, 0.1), 1);
    auto r = rate_monitor_verdict(rate_monitor(run, gamma_path(run), 0.5));
    EXPECT_EQ(r.verdict, F);
    EXPECT_EQ(r.witness_step, run.divergence);
}

TEST(Reports, CsvLayout) {
    auto r = report("I_i2", F);
    r.witness_step = 12;
    r.monitored_final = 0.5;
    r.threshold = 0.1;
    std::ostringstream os;
    write_reports_csv(os, {r});
    EXPECT_EQ(os.str(), "id,verdict,witness_step,monitored_final,threshold\nI_i2,fails,12,0.5,0.10000000000000001\n");
}
