#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "sa_lab/diagnostics.hpp"
#include "sa_lab/models.hpp"

namespace fixtures {

using sa_lab::StepContext;

// Linear drift −β_t u with a prescribed gain β_t, rate normalizer γ_t and
// noise coefficient; everything else from the custom model.
inline sa_lab::ModelSpec linear_fixture(std::function<double(const StepContext&)> beta,
                                        std::function<double(const StepContext&)> gamma,
                                        std::function<double(const StepContext&)> ell = nullptr) {
    sa_lab::ModelSpec m = sa_lab::build_model({"custom", {}});
    m.id.name = "fixture";
    m.beta = beta;
    m.drift = [beta](const StepContext& c, double u) { return -beta(c) * u; };
    m.gamma = gamma;
    if (ell) m.noise_coeff = [ell](const StepContext& c, double) { return ell(c); };
    else m.noise_coeff = [](const StepContext&, double) { return 0.0; };
    m.z0 = 0.0;
    return m;
}

// Right endpoint of the step: n on a discrete grid, t_i on a continuous one.
inline double right(const StepContext& c) { return c.K + c.dK; }

// K = γ = t+1, β = (t+1)^{-3/4}, d⟨M⟩ = (t+1)^{-7/4} dt.
inline sa_lab::ModelSpec example_e1() {
    return linear_fixture([](const StepContext& c) { return std::pow(1.0 + c.t, -0.75); },
                          [](const StepContext& c) { return 1.0 + right(c); },
                          [](const StepContext& c) { return std::pow(1.0 + c.t, -0.875); });
}

// γ = t, βγ alternating 1/2 + a (odd) and 1/2 − b (even).
inline sa_lab::ModelSpec example_e2(double a = 0.5, double b = 0.25) {
    return linear_fixture(
        [a, b](const StepContext& c) {
            double n = right(c);
            return (c.step % 2 == 1 ? 0.5 + a : 0.5 - b) / n;
        },
        [](const StepContext& c) { return right(c); });
}

// βγ = [1/2 − 1/log(t+1)]⁺.
inline sa_lab::ModelSpec example_e3() {
    return linear_fixture(
        [](const StepContext& c) {
            double n = right(c);
            return std::max(0.5 - 1.0 / std::log(n + 1.0), 0.0) / n;
        },
        [](const StepContext& c) { return right(c); });
}

// βγ = 1/2 − 1/t.
inline sa_lab::ModelSpec example_e4() {
    return linear_fixture(
        [](const StepContext& c) {
            double n = right(c);
            return (0.5 - 1.0 / n) / n;
        },
        [](const StepContext& c) { return right(c); });
}

// γ_t = Σ_{s≤t} q^s, β_t = (α/β₀)Δγ_t/γ_t with α = q/(q−1).
inline sa_lab::ModelSpec example_e5(double q = 2.0, double beta0 = 2.0) {
    double alpha = q / (q - 1.0);
    auto gam = [q](double n) { return q * (std::pow(q, n) - 1.0) / (q - 1.0); };
    return linear_fixture(
        [=](const StepContext& c) {
            double n = right(c);
            double prev = n > 1.0 ? gam(n - 1.0) : 1.0;
            return alpha / beta0 * (gam(n) - prev) / gam(n);
        },
        [=](const StepContext& c) { return gam(right(c)); });
}

struct Verdicts {
    std::vector<sa_lab::ConditionReport> reports;
    sa_lab::Verdict operator[](const std::string& id) const {
        for (const auto& r : reports)
            if (r.id == id) return r.verdict;
        throw std::out_of_range("no report " + id);
    }
};

inline Verdicts rate_verdicts(const sa_lab::ModelSpec& m, const sa_lab::TimeGrid& g, double delta,
                              double delta0 = 1.0) {
    std::vector<double> z(g.points(), 0.0);
    return {sa_lab::check_rate_conditions(sa_lab::FieldView::of(m, g), z, delta, delta0)};
}

}  // namespace fixtures
