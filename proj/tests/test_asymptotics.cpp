#include <gtest/gtest.h>

#include <cmath>

#include "sa_lab/asymptotics.hpp"

using namespace sa_lab;

namespace {

RmRun run_of(const ModelId& id, const TimeGrid& g, std::uint64_t seed = 1) {
    return simulate(std::make_shared<const ModelSpec>(build_model(id)), share(g), seed);
}

const ConditionReport& find(const std::vector<ConditionReport>& rs, const std::string& id) {
    for (const auto& r : rs)
        if (r.id == id) return r;
    throw std::out_of_range(id);
}

}  // namespace

TEST(Decomposition, ReconstructionAcrossModels) {
    std::vector<RmRun> runs{
        run_of({"linear_standard", {}}, TimeGrid::uniform(100.0, 0.01)),
        run_of({"linear_slow_gain", {}}, TimeGrid::uniform(100.0, 0.01)),
        run_of({"rm_slow_gain", {}}, TimeGrid::uniform(100.0, 0.05)),
        run_of({"deterministic_regression", {}}, TimeGrid::uniform(100.0, 0.05)),
        run_of({"custom", {{"p", 0.7}, {"q", 0.6}}}, TimeGrid::discrete(2000)),
        run_of({"galton_watson", {{"theta", 0.5}, {"theta0", 7.0}}}, TimeGrid::discrete(1000)),
        run_of({"galton_watson", {{"theta", 2.0}, {"theta0", -5.0}}}, TimeGrid::discrete(1000)),
    };
    for (const auto& run : runs) {
        auto d = asymptotic_decomposition(run);
        EXPECT_LE(d.reconstruction_error, 1e-10) << run.model->id.name;
        for (std::size_t i = 0; i < d.R.size(); ++i) {
            double s = std::sqrt(d.L_qc[i]);
            double scale = std::max({1.0, std::abs(d.chi[i] * run.z[i]), std::abs(d.L[i] / s)});
            ASSERT_NEAR(d.chi[i] * run.z[i], d.L[i] / s + d.R[i], 1e-10 * scale) << run.model->id.name << " " << i;
        }
    }
}

// The first GW step has βΔK = X_0/S_1 = 1 and is excised; afterwards Γ_n = S_n.
TEST(Decomposition, GaltonWatsonExcisesFirstStep) {
    auto run = run_of({"galton_watson", {{"theta", 1.0}}}, TimeGrid::discrete(200));
    auto d = asymptotic_decomposition(run);
    EXPECT_TRUE(d.excised[0]);
    for (std::size_t i = 1; i < d.excised.size(); ++i) EXPECT_FALSE(d.excised[i]);
    for (std::size_t n = 1; n <= 200; ++n) {
        double S = run.cov[2 * (n - 1) + 1];
        EXPECT_NEAR(d.Gamma[n], S, 1e-9 * S);
    }
    EXPECT_EQ(find(check_expansion_conditions(run, d, 0.25, 1.0), "e").monitored_final, 1.0);
}

// Continuous linear gain: Γ_t ≈ (1+t)^{αβ}.
TEST(Decomposition, LinearGammaIsPowerLaw) {
    auto run = run_of({"linear_standard", {{"beta", 1.5}}}, TimeGrid::uniform(100.0, 1e-3));
    auto d = asymptotic_decomposition(run);
    EXPECT_NEAR(d.Gamma.back() / std::pow(101.0, 1.5), 1.0, 5e-3);
    EXPECT_TRUE(asymptotic_decomposition(run_of({"custom", {{"b", 1.0}}}, TimeGrid::discrete(3))).excised[0]);
}

TEST(Decomposition, DivergedRunRejected) {
    ModelSpec m = build_model({"custom", {}});
    m.drift = [](const StepContext&, double u) { return 10.0 * u; };
    auto run = simulate(m, TimeGrid::uniform(50.0, 0.1), 1);
    EXPECT_THROW(asymptotic_decomposition(run), ValidationError);
}

TEST(Expansion, LinearModelHasNoNonlinearRemainder) {
    auto run = run_of({"linear_standard", {}}, TimeGrid::uniform(1000.0, 0.05));
    auto d = asymptotic_decomposition(run);
    auto rs = check_expansion_conditions(run, d, 0.25, 1.0);
    EXPECT_EQ(find(rs, "d").verdict, Verdict::holds);
    EXPECT_EQ(find(rs, "e").verdict, Verdict::holds);
    EXPECT_EQ(find(rs, "f").verdict, Verdict::holds);
    EXPECT_EQ(find(rs, "g").verdict, Verdict::holds);
    for (double v : d.R_parts[1].values) EXPECT_NEAR(v, 0.0, 1e-9);
    EXPECT_THROW(check_expansion_conditions(run, d, 0.6, 1.0), ValidationError);
    EXPECT_THROW(check_expansion_conditions(run, d, 0.1, 0.5), ValidationError);
}

TEST(Expansion, PathDependentNormalizerIsInconclusive) {
    auto run = run_of({"galton_watson", {{"theta", 0.5}}}, TimeGrid::discrete(500));
    auto rs = check_expansion_conditions(run, asymptotic_decomposition(run), 0.25, 1.0);
    EXPECT_EQ(find(rs, "d").verdict, Verdict::inconclusive);
}

TEST(Averaging, ConstantPathIsFixed) {
    auto g = share(TimeGrid::uniform(10.0, 0.1));
    SamplePath z(g, 2.5);
    auto a = polyak_average(z, plain_weight(g), "plain");
    for (double v : a.zbar.values) EXPECT_NEAR(v, 2.5, 1e-12);
}

// With ε = 1+n on a discrete clock, z̄_n = (z_0 + z_0 + … + z_{n-1})/(n+1).
TEST(Averaging, PlainWeightIsRunningMean) {
    auto g = share(TimeGrid::discrete(6));
    SamplePath z(g, std::vector<double>{1, 4, -2, 3, 0, 5, 7});
    auto a = polyak_average(z, plain_weight(g), "plain");
    double s = z[0];
    for (std::size_t n = 1; n <= 6; ++n) {
        s += z[n - 1];
        EXPECT_NEAR(a.zbar[n], s / static_cast<double>(n + 1), 1e-12);
    }
}

TEST(Averaging, DensityFormMatchesPathForm) {
    auto g = share(TimeGrid::uniform(20.0, 0.01));
    auto run = run_of({"linear_standard", {}}, *g);
    std::vector<double> dens(g->steps());
    for (std::size_t i = 1; i <= g->steps(); ++i) dens[i - 1] = 1.0 / (1.0 + g->t(i - 1));
    auto a = polyak_average(run.z, dens, g);
    auto b = polyak_average(run.z, a.eps, "same");
    for (std::size_t i = 0; i < a.zbar.size(); ++i) EXPECT_NEAR(a.zbar[i], b.zbar[i], 1e-12);
    EXPECT_THROW(polyak_average(run.z, std::vector<double>(g->steps(), -1.0), g), ValidationError);
}

TEST(Averaging, AlphaWeightIdentityAndGrowth) {
    auto run = run_of({"linear_standard", {}}, TimeGrid::uniform(200.0, 0.01));
    auto d = asymptotic_decomposition(run);
    auto e = alpha_weight(d, 1.0);
    EXPECT_EQ(e[0], 1.0);
    for (std::size_t i = 1; i < e.size(); ++i) ASSERT_GE(e[i], e[i - 1]);
    EXPECT_GT(e.back(), 50.0);
    EXPECT_THROW(alpha_weight(d, std::vector<double>(3, 1.0)), ShapeError);
    EXPECT_THROW(alpha_weight(d, -1.0), ValidationError);
}

TEST(Averaging, ConditionsOnLinearModel) {
    auto run = run_of({"linear_standard", {}}, TimeGrid::uniform(1000.0, 0.05));
    auto d = asymptotic_decomposition(run);
    auto rs = check_averaging_conditions(run, d, alpha_weight(d), 1.0);
    EXPECT_EQ(find(rs, "avg_i").verdict, Verdict::holds);
    EXPECT_EQ(find(rs, "avg_ii").verdict, Verdict::holds);
}

TEST(Prediction, ClosedFormVariances) {
    auto zs = predicted_variance({"linear_standard", {}}, Statistic::z_terminal);
    auto zb = predicted_variance({"linear_standard", {}}, Statistic::zbar_terminal);
    EXPECT_TRUE(zs.available);
    EXPECT_DOUBLE_EQ(zs.variance, 1.0);
    EXPECT_DOUBLE_EQ(zs.exponent, 0.5);
    EXPECT_DOUBLE_EQ(zb.variance, 2.0);
    auto rs = predicted_variance({"rm_slow_gain", {}}, Statistic::z_terminal);
    EXPECT_DOUBLE_EQ(rs.variance, 0.25);
    EXPECT_DOUBLE_EQ(rs.exponent, 0.45);
    EXPECT_DOUBLE_EQ(predicted_variance({"rm_slow_gain", {}}, Statistic::zbar_terminal).variance, 1.0);
    auto lin = predicted_variance({"linear_standard", {{"alpha", 2.0}, {"beta", 1.0}, {"sigma", 3.0}}},
                                  Statistic::z_terminal);
    EXPECT_DOUBLE_EQ(lin.variance, 12.0);
    EXPECT_FALSE(predicted_variance({"galton_watson", {}}, Statistic::z_terminal).available);
}

// ∫(B_t − B_s)² d⟨L⟩_s (unit atom at 0) equals 2∫(∫⟨L⟩dB)dB.
TEST(Btilde, DirectAndDoubleIntegralAgree) {
    auto g = TimeGrid::uniform(50.0, 0.005);
    std::vector<double> B(g.points()), L(g.points());
    for (std::size_t i = 0; i < B.size(); ++i) {
        double t = g.t(i);
        B[i] = std::log1p(t) + 0.1 * std::sin(t);
        L[i] = 1.0 + t + 0.3 * t * t;
    }
    auto a = btilde_direct(B, L), b = btilde_double(B, L);
    EXPECT_EQ(a[0], 0.0);
    for (std::size_t i = 1000; i < a.size(); i += 1000) EXPECT_NEAR(a[i] / b[i], 1.0, 1e-4) << i;
}
