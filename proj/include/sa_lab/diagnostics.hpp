#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "models.hpp"
#include "process_core.hpp"
#include "rm_engine.hpp"

namespace sa_lab {

enum class Verdict { holds, fails, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        default: return "inconclusive";
    }
}

struct ConditionReport {
    std::string id;
    Verdict verdict = Verdict::inconclusive;
    std::vector<double> trajectory;  // monitored partial sum / process, per grid point
    std::optional<std::size_t> witness_step;
    std::optional<double> witness_u;
    double monitored_final = 0.0;
    double threshold = 0.0;
    double horizon = 0.0;
    std::string note;
};

struct ClassifierThresholds {
    double finite_rel = 0.01;     // last-decade increment below this share of the total: finite
    double divergent_rel = 0.10;  // above this share: divergent
    double decade_ratio = 0.5;    // in between: divergent if decade increments are not shrinking
    bool operator==(const ClassifierThresholds&) const = default;
};

enum class SeriesClass { finite, divergent, unknown };

struct SeriesVerdict {
    SeriesClass cls = SeriesClass::unknown;
    std::optional<std::size_t> witness;
    double last_decade_rel = 0.0;
    double threshold = 0.0;
};

namespace detail {

// Last grid index with time <= t.
inline std::size_t index_at_or_before(const std::vector<double>& times, double t) {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
}

}  // namespace detail

// Flat-tail test for a nondecreasing partial-sum trajectory over `last+1` points.
inline SeriesVerdict classify_series(const std::vector<double>& partial, const std::vector<double>& times,
                                     const ClassifierThresholds& th, std::size_t last) {
    SeriesVerdict v;
    double T = times[last];
    std::size_t i1 = std::min(detail::index_at_or_before(times, T / 10.0), last);
    std::size_t i2 = std::min(detail::index_at_or_before(times, T / 100.0), i1);
    double total = partial[last];
    double inc = partial[last] - partial[i1];
    double prev = partial[i1] - partial[i2];
    if (!std::isfinite(total)) {
        v.cls = SeriesClass::divergent;
        v.witness = last;
        v.last_decade_rel = 1.0;
        return v;
    }
    if (total <= 0.0) {
        v.cls = SeriesClass::finite;
        v.threshold = th.finite_rel;
        return v;
    }
    v.last_decade_rel = inc / total;
    double trigger = 0.0;
    if (v.last_decade_rel < th.finite_rel) {
        v.cls = SeriesClass::finite;
        v.threshold = th.finite_rel;
        return v;
    }
    if (v.last_decade_rel > th.divergent_rel) {
        v.cls = SeriesClass::divergent;
        trigger = th.divergent_rel;
    } else if (prev > 0.0 && inc >= th.decade_ratio * prev) {
        v.cls = SeriesClass::divergent;
        trigger = th.finite_rel;
    } else {
        v.cls = SeriesClass::unknown;
        v.threshold = th.divergent_rel;
        return v;
    }
    v.threshold = trigger;
    v.witness = last;
    for (std::size_t j = i1 + 1; j <= last; ++j)
        if (partial[j] - partial[i1] > trigger * partial[j]) {
            v.witness = j;
            break;
        }
    return v;
}

inline SeriesVerdict classify_series(const std::vector<double>& partial, const std::vector<double>& times,
                                     const ClassifierThresholds& th = {}) {
    return classify_series(partial, times, th, partial.size() - 1);
}

namespace detail {

inline ConditionReport series_report(std::string id, std::vector<double> partial, const TimeGrid& g,
                                     std::size_t last, bool required_finite, const ClassifierThresholds& th) {
    ConditionReport r;
    r.id = std::move(id);
    SeriesVerdict s = classify_series(partial, g.times(), th, last);
    r.monitored_final = partial[last];
    r.horizon = g.t(last);
    r.threshold = s.threshold;
    if (required_finite) {
        r.verdict = s.cls == SeriesClass::finite      ? Verdict::holds
                    : s.cls == SeriesClass::divergent ? Verdict::fails
                                                      : Verdict::inconclusive;
        if (r.verdict == Verdict::fails) r.witness_step = s.witness;
    } else {
        r.verdict = s.cls == SeriesClass::divergent ? Verdict::holds
                    : s.cls == SeriesClass::finite  ? Verdict::fails
                                                    : Verdict::inconclusive;
        if (r.verdict == Verdict::holds) r.note = "growth evidence, not a proof";
        if (r.verdict == Verdict::fails) {
            r.witness_step = last;
            r.note = "flat tail at horizon";
        }
    }
    r.trajectory = std::move(partial);
    return r;
}

// Boundedness of a running maximum: a small last-decade share, or decade
// increments that are shrinking, reads as bounded.
inline ConditionReport bounded_report(std::string id, std::vector<double> runmax, const TimeGrid& g,
                                      std::size_t last, const ClassifierThresholds& th) {
    ConditionReport r;
    r.id = std::move(id);
    double T = g.t(last);
    std::size_t i1 = std::min(index_at_or_before(g.times(), T / 10.0), last);
    std::size_t i2 = std::min(index_at_or_before(g.times(), T / 100.0), i1);
    double total = runmax[last], inc = runmax[last] - runmax[i1], prev = runmax[i1] - runmax[i2];
    r.monitored_final = total;
    r.horizon = T;
    r.threshold = th.divergent_rel;
    double rel = total > 0.0 ? inc / total : 0.0;
    if (!std::isfinite(total)) {
        r.verdict = Verdict::fails;
        r.witness_step = last;
    } else if (rel < th.finite_rel || (rel <= th.divergent_rel && inc < prev)) {
        r.verdict = Verdict::holds;
    } else if (rel > th.divergent_rel) {
        r.verdict = Verdict::fails;
        r.witness_step = last;
        for (std::size_t j = i1 + 1; j <= last; ++j)
            if (runmax[j] - runmax[i1] > th.divergent_rel * runmax[j]) {
                r.witness_step = j;
                break;
            }
    } else {
        r.verdict = Verdict::inconclusive;
    }
    r.trajectory = std::move(runmax);
    return r;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    double a = std::log(lo), b = std::log(hi);
    for (std::size_t k = 0; k < n; ++k) out[k] = std::exp(a + (b - a) * static_cast<double>(k) / (n - 1));
    return out;
}

inline std::vector<double> symmetric(const std::vector<double>& pos) {
    std::vector<double> out;
    for (double u : pos) out.push_back(-u);
    for (double u : pos) out.push_back(u);
    return out;
}

}  // namespace detail

// u sampled log-uniformly on [ε, 1/ε], 40 points per sign.
inline std::vector<double> epsilon_u_grid(double eps) {
    return detail::symmetric(detail::logspace(eps, 1.0 / eps, 40));
}

// Wide grid for fitting envelopes C_t, B_t, D_t, G_t, G̃_t.
inline std::vector<double> fit_u_grid() { return detail::symmetric(detail::logspace(1e-3, 1e3, 61)); }

inline std::vector<double> default_sign_u_grid() {
    std::vector<double> pos;
    for (int k = -3; k <= 1; ++k) pos.push_back(std::pow(10.0, k));
    return detail::symmetric(pos);
}

// Read-only view of a path-dependent model on a grid (covariates from a run).
struct FieldView {
    const ModelSpec* model;
    const TimeGrid* grid;
    const std::vector<double>* cov;
    std::size_t last;

    static FieldView of(const RmRun& run) {
        return {run.model.get(), run.grid.get(), &run.cov, run.last_step()};
    }
    static FieldView of(const ModelSpec& m, const TimeGrid& g) {
        static const std::vector<double> none;
        if (m.cov_dim) throw ValidationError(m.id.name + " fields depend on the observed path; pass a run");
        return {&m, &g, &none, g.steps()};
    }
    StepContext context(std::size_t i) const { return make_context(*grid, i, *cov, model->cov_dim); }
};

inline ConditionReport check_drift_sign(const FieldView& f, const std::vector<double>& u_grid) {
    if (u_grid.empty() || f.last == 0) throw ValidationError("check_drift_sign: empty grid");
    ConditionReport r;
    r.id = "A";
    r.horizon = f.grid->t(f.last);
    r.verdict = Verdict::holds;
    for (std::size_t i = 1; i <= f.last; ++i) {
        StepContext c = f.context(i);
        double h0 = f.model->drift(c, 0.0);
        if (std::isnan(h0)) {
            r.verdict = Verdict::inconclusive;
            r.witness_step = i;
            r.witness_u = 0.0;
            r.note = "evaluator NaN";
            return r;
        }
        if (h0 != 0.0) {
            r.verdict = Verdict::fails;
            r.witness_step = i;
            r.witness_u = 0.0;
            r.note = "H_t(0) != 0";
            return r;
        }
        for (double u : u_grid) {
            if (u == 0.0) throw ValidationError("check_drift_sign: u grid must exclude 0");
            double h = f.model->drift(c, u);
            if (std::isnan(h)) {
                r.verdict = Verdict::inconclusive;
                r.witness_step = i;
                r.witness_u = u;
                r.note = "evaluator NaN";
                return r;
            }
            if (!(h * u < 0.0)) {
                r.verdict = Verdict::fails;
                r.witness_step = i;
                r.witness_u = u;
                r.monitored_final = h * u;
                r.note = "H_t(u)u >= 0";
                return r;
            }
        }
    }
    return r;
}

inline ConditionReport check_drift_sign(const ModelSpec& m, const std::vector<double>& u_grid, const TimeGrid& g) {
    return check_drift_sign(FieldView::of(m, g), u_grid);
}

// (B): h_t(u,u) <= B_t(1+u²) with B∘K_∞ < ∞; B_t fitted on the u-grid.
inline ConditionReport check_qc_bound(const FieldView& f, const ClassifierThresholds& th = {}) {
    auto us = fit_u_grid();
    us.push_back(0.0);
    std::vector<double> s(f.grid->points(), 0.0);
    for (std::size_t i = 1; i <= f.last; ++i) {
        StepContext c = f.context(i);
        double b = 0.0;
        for (double u : us) b = std::max(b, f.model->qc_density(c, u, u) / (1.0 + u * u));
        s[i] = s[i - 1] + b * c.dK;
    }
    return detail::series_report("B", std::move(s), *f.grid, f.last, true, th);
}

namespace detail {

// ∫ inf_{u∈U} integrand(c,u) dK as a partial-sum trajectory.
template <class F>
std::vector<double> inf_integral(const FieldView& f, const std::vector<double>& us, F integrand) {
    std::vector<double> s(f.grid->points(), 0.0);
    for (std::size_t i = 1; i <= f.last; ++i) {
        StepContext c = f.context(i);
        double m = std::numeric_limits<double>::infinity();
        for (double u : us) m = std::min(m, integrand(c, u));
        s[i] = s[i - 1] + m * c.dK;
    }
    return s;
}

inline ConditionReport combine_growth(std::string id, std::vector<ConditionReport> parts) {
    ConditionReport r = std::move(parts.back());
    r.id = std::move(id);
    bool all_hold = true, any_fail = false;
    for (const auto& p : parts) {
        all_hold = all_hold && p.verdict == Verdict::holds;
        if (p.verdict == Verdict::fails) {
            any_fail = true;
            r.witness_step = p.witness_step;
        }
    }
    r.verdict = any_fail ? Verdict::fails : all_hold ? Verdict::holds : Verdict::inconclusive;
    if (r.verdict != Verdict::fails) r.witness_step.reset();
    return r;
}

}  // namespace detail

inline std::vector<ConditionReport> check_group_I(const FieldView& f, const ClassifierThresholds& th = {}) {
    const auto& m = *f.model;
    auto us = fit_u_grid();
    std::vector<double> c1(f.grid->points(), 0.0), c2(f.grid->points(), 0.0);
    bool finite = true;
    for (std::size_t i = 1; i <= f.last; ++i) {
        StepContext c = f.context(i);
        double C = 0.0;
        if (c.jump)
            for (double u : us) C = std::max(C, std::abs(m.drift(c, u)) / (1.0 + std::abs(u)));
        finite = finite && std::isfinite(C);
        c1[i] = c1[i - 1] + C * c.dK;
        c2[i] = c2[i - 1] + C * C * c.dK;
    }
    std::vector<ConditionReport> out;
    ConditionReport i1;
    i1.id = "I_i1";
    i1.verdict = finite ? Verdict::holds : Verdict::fails;
    i1.monitored_final = c1[f.last];
    i1.horizon = f.grid->t(f.last);
    i1.trajectory = std::move(c1);
    out.push_back(std::move(i1));
    out.push_back(detail::series_report("I_i2", std::move(c2), *f.grid, f.last, true, th));

    std::vector<ConditionReport> parts;
    for (double eps : {0.1, 0.01}) {
        auto s = detail::inf_integral(f, epsilon_u_grid(eps), [&](const StepContext& c, double u) {
            return std::abs(2.0 * m.drift(c, u) * u);
        });
        parts.push_back(detail::series_report("I_ii", std::move(s), *f.grid, f.last, false, th));
    }
    out.push_back(detail::combine_growth("I_ii", std::move(parts)));
    return out;
}

inline std::vector<ConditionReport> check_group_I(const RmRun& run, const ClassifierThresholds& th = {}) {
    return check_group_I(FieldView::of(run), th);
}

inline std::vector<ConditionReport> check_group_II(const FieldView& f, const ClassifierThresholds& th = {}) {
    const auto& m = *f.model;
    auto us = fit_u_grid();
    std::vector<double> d(f.grid->points(), 0.0);
    for (std::size_t i = 1; i <= f.last; ++i) {
        StepContext c = f.context(i);
        double D = 0.0;
        if (c.jump)
            for (double u : us) {
                double h = m.drift(c, u);
                D = std::max(D, std::max(2.0 * h * u + h * h * c.dK, 0.0) / (1.0 + u * u));
            }
        d[i] = d[i - 1] + D * c.dK;
    }
    std::vector<ConditionReport> out;
    out.push_back(detail::series_report("II_i", std::move(d), *f.grid, f.last, true, th));
    std::vector<ConditionReport> parts;
    for (double eps : {0.1, 0.01}) {
        auto s = detail::inf_integral(f, epsilon_u_grid(eps), [&](const StepContext& c, double u) {
            double h = m.drift(c, u);
            double vm = 2.0 * h * u;
            if (!c.jump) return std::abs(vm);
            return std::max(-(vm + h * h * c.dK), 0.0);
        });
        parts.push_back(detail::series_report("II_ii", std::move(s), *f.grid, f.last, false, th));
    }
    out.push_back(detail::combine_growth("II_ii", std::move(parts)));
    return out;
}

inline std::vector<ConditionReport> check_group_II(const RmRun& run, const ClassifierThresholds& th = {}) {
    return check_group_II(FieldView::of(run), th);
}

// (S.1)/(S.2) with G_t, G̃_t fitted as min/max of |H|/|u| over the u-grid.
inline std::vector<ConditionReport> check_S1_S2(const FieldView& f, const std::vector<double>& u_grid,
                                                const ClassifierThresholds& th = {}) {
    const auto& m = *f.model;
    std::size_t P = f.grid->points();
    std::vector<double> g1(P, 0.0), s1i2(P, 0.0), s1ii(P, 0.0), s2i(P, 0.0), s2ii(P, 0.0);
    bool bounded = true;
    for (std::size_t i = 1; i <= f.last; ++i) {
        StepContext c = f.context(i);
        double G = std::numeric_limits<double>::infinity(), Gt = 0.0;
        for (double u : u_grid) {
            if (u == 0.0) continue;
            double k = std::abs(m.drift(c, u)) / std::abs(u);
            G = std::min(G, k);
            Gt = std::max(Gt, k);
        }
        bounded = bounded && std::isfinite(Gt);
        double dK = c.dK;
        g1[i] = g1[i - 1] + Gt * dK;
        s1i2[i] = s1i2[i - 1] + (c.jump ? Gt * Gt * dK : 0.0);
        s1ii[i] = s1ii[i - 1] + G * dK;
        double delta = Gt * dK - 2.0;  // only meaningful on jump steps
        s2i[i] = s2i[i - 1] + (c.jump ? Gt * std::max(delta, 0.0) * dK : 0.0);
        s2ii[i] = s2ii[i - 1] + G * (c.jump ? std::max(-delta, 0.0) : 2.0) * dK;
    }
    std::vector<ConditionReport> out;
    ConditionReport a;
    a.id = "S1_i1";
    a.verdict = bounded ? Verdict::holds : Verdict::fails;
    a.monitored_final = g1[f.last];
    a.horizon = f.grid->t(f.last);
    a.trajectory = std::move(g1);
    out.push_back(std::move(a));
    out.push_back(detail::series_report("S1_i2", std::move(s1i2), *f.grid, f.last, true, th));
    out.push_back(detail::series_report("S1_ii", std::move(s1ii), *f.grid, f.last, false, th));
    out.push_back(detail::series_report("S2_i", std::move(s2i), *f.grid, f.last, true, th));
    out.push_back(detail::series_report("S2_ii", std::move(s2ii), *f.grid, f.last, false, th));
    return out;
}

inline std::vector<ConditionReport> check_S1_S2(const ModelSpec& m, const std::vector<double>& u_grid,
                                                const TimeGrid& g, const ClassifierThresholds& th = {}) {
    return check_S1_S2(FieldView::of(m, g), u_grid, th);
}

// γ_0 = 1, γ_i from the model at each step's right endpoint.
inline std::vector<double> gamma_path(const FieldView& f) {
    std::vector<double> g(f.grid->points(), 1.0);
    for (std::size_t i = 1; i <= f.grid->steps(); ++i) g[i] = f.model->gamma(f.context(i));
    return g;
}

inline std::vector<double> gamma_path(const RmRun& run) {
    return gamma_path(FieldView{run.model.get(), run.grid.get(), &run.cov, run.grid->steps()});
}

// Running sup over the final decade of time against the previous decade.
inline ConditionReport decade_decrease_report(std::string id, const std::vector<double>& values,
                                              const TimeGrid& g, std::size_t last) {
    ConditionReport r;
    r.id = std::move(id);
    double T = g.t(last);
    std::size_t i1 = std::min(detail::index_at_or_before(g.times(), T / 10.0), last);
    std::size_t i2 = std::min(detail::index_at_or_before(g.times(), T / 100.0), i1);
    double m_last = 0.0, m_prev = 0.0;
    std::size_t arg = last;
    for (std::size_t j = i1 + 1; j <= last; ++j)
        if (std::abs(values[j]) > m_last) {
            m_last = std::abs(values[j]);
            arg = j;
        }
    for (std::size_t j = i2 + 1; j <= i1; ++j) m_prev = std::max(m_prev, std::abs(values[j]));
    r.monitored_final = values[last];
    r.threshold = m_prev;
    r.horizon = T;
    if (m_last == 0.0 || m_last < m_prev) {
        r.verdict = Verdict::holds;
    } else if (m_last > 1.1 * m_prev) {
        r.verdict = Verdict::fails;
        r.witness_step = arg;
    } else {
        r.verdict = Verdict::inconclusive;
    }
    r.trajectory = values;
    return r;
}

inline SamplePath rate_monitor(const RmRun& run, const std::vector<double>& gamma, double delta) {
    if (gamma.size() != run.grid->points()) throw ShapeError("rate_monitor: gamma path does not match the grid");
    std::vector<double> v(gamma.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(gamma[i], delta) * run.z[i] * run.z[i];
    return SamplePath(run.grid, std::move(v), run.divergence);
}

inline ConditionReport rate_monitor_verdict(const SamplePath& monitor) {
    std::size_t last = monitor.divergence ? *monitor.divergence - 1 : monitor.size() - 1;
    auto r = decade_decrease_report("rate_monitor", monitor.values, *monitor.grid, last);
    if (monitor.divergence) {
        r.verdict = Verdict::fails;
        r.witness_step = monitor.divergence;
        r.note = "run diverged";
    }
    return r;
}

inline std::vector<ConditionReport> check_rate_conditions(const FieldView& f, const std::vector<double>& z,
                                                          double delta, double delta0,
                                                          const ClassifierThresholds& th = {}) {
    if (!(delta > 0.0 && delta < delta0 && delta0 <= 1.0))
        throw ValidationError("rate conditions require 0<delta<delta0<=1");
    const auto& m = *f.model;
    const auto& g = *f.grid;
    std::size_t P = g.points(), last = f.last;
    std::vector<double> gam = gamma_path(f);
    std::vector<double> c3(P, 0.0), c4(P, 0.0), c21(P, 0.0), bt(P, 0.0), ct(P, 0.0);
    std::vector<double> A(P, 0.0), Amax(P, 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i <= last; ++i) {
        StepContext c = f.context(i);
        double u = z[i - 1];
        double b = m.beta_at(c, u);
        double dg = gam[i] - gam[i - 1];
        double x = dg / gam[i];
        double gd = c.dK > 0.0 ? dg / c.dK : 0.0;
        double rbar = (c.jump && x > 0.0) ? (1.0 - std::pow(1.0 - x, delta)) / x : delta;
        double rd = rbar * gd / gam[i];
        double jump_term = c.jump ? b * b * c.dK : 0.0;
        c3[i] = c3[i - 1] + std::pow(gam[i - 1] / gam[i], -delta) * std::max(rd - 2.0 * b + jump_term, 0.0) * c.dK;
        c4[i] = c4[i - 1] + std::pow(gam[i], delta) * m.qc_density(c, u, u) * c.dK;
        double t21 = (gd > 0.0) ? std::max(delta - gam[i] * b / gd, 0.0) * x : 0.0;
        c21[i] = c21[i - 1] + t21;
        bt[i] = bt[i - 1] + std::max(delta - A[i - 1], 0.0) * x;
        ct[i] = ct[i - 1] + std::max(A[i - 1] - delta, 0.0) * x;
        acc += b * gam[i] * c.dK;
        A[i] = acc / gam[i];
        Amax[i] = std::max(Amax[i - 1], std::abs(A[i]));
    }
    std::vector<ConditionReport> out;
    out.push_back(detail::series_report("R_2_2_3", std::move(c3), g, last, true, th));
    out.push_back(detail::series_report("R_2_2_4", std::move(c4), g, last, true, th));
    out.push_back(detail::series_report("R_2_2_21", std::move(c21), g, last, true, th));
    auto a = detail::bounded_report("a_tilde", std::move(Amax), g, last, th);
    a.monitored_final = A[last];
    out.push_back(std::move(a));
    out.push_back(detail::series_report("b_tilde", std::move(bt), g, last, true, th));
    out.push_back(detail::series_report("c_tilde", std::move(ct), g, last, false, th));

    ConditionReport bc;
    bc.id = "bc_tilde";
    bc.horizon = g.t(last);
    bc.threshold = delta0 / 2.0;
    bc.verdict = Verdict::holds;
    double lo = std::numeric_limits<double>::infinity();
    std::size_t start = std::max<std::size_t>(1, detail::index_at_or_before(g.times(), g.t(last) / 2.0));
    for (std::size_t i = start; i <= last; ++i) {
        double v = A[i] - delta0 / 2.0;
        if (v < lo) lo = v;
        if (v <= 0.0 && bc.verdict == Verdict::holds) {
            bc.verdict = Verdict::fails;
            bc.witness_step = i;
        }
    }
    bc.monitored_final = lo;
    bc.trajectory = std::move(A);
    out.push_back(std::move(bc));
    return out;
}

inline std::vector<ConditionReport> check_rate_conditions(const RmRun& run, double delta, double delta0,
                                                          const ClassifierThresholds& th = {}) {
    return check_rate_conditions(FieldView::of(run), run.z.values, delta, delta0, th);
}

struct ImplicationAudit {
    std::string premise, conclusion;
    bool premise_holds = false, conclusion_holds = false;
    bool consistent() const { return !premise_holds || conclusion_holds; }
};

inline ImplicationAudit audit_implication(const std::vector<ConditionReport>& reports, const std::string& premise,
                                          const std::string& conclusion) {
    auto all_hold = [&](const std::string& prefix) {
        bool any = false;
        for (const auto& r : reports)
            if (r.id.rfind(prefix, 0) == 0) {
                any = true;
                if (r.verdict != Verdict::holds) return false;
            }
        return any;
    };
    return {premise, conclusion, all_hold(premise + "_"), all_hold(conclusion + "_")};
}

inline std::vector<ImplicationAudit> audit_implications(const std::vector<ConditionReport>& reports) {
    return {audit_implication(reports, "I", "II"), audit_implication(reports, "S1", "I")};
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void write_reports_csv(std::ostream& os, const std::vector<ConditionReport>& reports) {
    os << "id,verdict,witness_step,monitored_final,threshold\n";
    for (const auto& r : reports) {
        os << r.id << ',' << to_string(r.verdict) << ',';
        if (r.witness_step) os << *r.witness_step;
        os << ',' << format_double(r.monitored_final) << ',' << format_double(r.threshold) << '\n';
    }
}

inline void write_reports_text(std::ostream& os, const std::vector<ConditionReport>& reports) {
    for (const auto& r : reports) {
        os << r.id << ": " << to_string(r.verdict) << "  (monitored " << format_double(r.monitored_final)
           << ", horizon " << r.horizon;
        if (r.witness_step) os << ", witness step " << *r.witness_step;
        if (r.witness_u) os << ", witness u " << *r.witness_u;
        os << ')';
        if (!r.note.empty()) os << "  " << r.note;
        os << '\n';
    }
}

}  // namespace sa_lab
