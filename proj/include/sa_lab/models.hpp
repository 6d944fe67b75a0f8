#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"
#include "process_core.hpp"
#include "rng.hpp"

namespace sa_lab {

// What a field evaluator may see at step i: the left endpoint (t, K), the
// step's dK and jump flag, and predictable covariates (GW: X_{n-1}, S_n).
struct StepContext {
    std::size_t step = 0;
    double t = 0.0;
    double K = 0.0;
    double dK = 0.0;
    bool jump = false;
    const double* cov = nullptr;
};

using Field = std::function<double(const StepContext&, double)>;
using StepScalar = std::function<double(const StepContext&)>;

// Exogenous noise for one replication. `cov` holds cov_dim predictable
// covariates per step; `observed` is the model's observed process if any.
struct NoiseDraw {
    IncrementStream inc;
    std::vector<double> cov;
    std::vector<double> observed;
};

using NoiseSource = std::function<NoiseDraw(const TimeGrid&, Rng&)>;

struct ModelId {
    std::string name;
    std::map<std::string, double> params;
    bool operator==(const ModelId&) const = default;
};

struct ModelSpec {
    ModelId id;
    Field drift;          // H_t(u)
    Field noise_coeff;    // ℓ_t(u), multiplies dm
    StepScalar qc_rate;   // d⟨m⟩/dK
    StepScalar beta;      // −lim H/u at 0
    Field beta_field;     // −H/u; derived from drift when empty
    StepScalar gamma;     // rate normalizer at the step's right endpoint
    NoiseSource noise;
    double z0 = 0.0;
    bool discrete_clock = false;
    std::size_t cov_dim = 0;

    double qc_density(const StepContext& c, double u, double v) const {
        return noise_coeff(c, u) * noise_coeff(c, v) * qc_rate(c);
    }
    double beta_at(const StepContext& c, double u) const {
        if (beta_field) return beta_field(c, u);
        return u == 0.0 ? beta(c) : -drift(c, u) / u;
    }
    double param(const std::string& k) const { return id.params.at(k); }
};

inline StepContext make_context(const TimeGrid& g, std::size_t step, const std::vector<double>& cov,
                                std::size_t cov_dim) {
    StepContext c;
    c.step = step;
    c.t = g.t(step - 1);
    c.K = g.K(step - 1);
    c.dK = g.dK(step);
    c.jump = g.jump(step);
    c.cov = cov_dim ? cov.data() + (step - 1) * cov_dim : nullptr;
    return c;
}

// X_i = 1 + Poisson(θ X_{i-1}): offspring of X_{i-1} individuals plus one immigrant.
inline double gw_transition(double theta, double x_prev, Rng& rng) {
    if (!(theta > 0.0)) throw ValidationError("galton_watson requires theta>0");
    if (x_prev <= 0.0) return 1.0;
    return 1.0 + rng.poisson(theta * x_prev);
}

// Gaussian martingale noise with d⟨m⟩ = qc_rate·dK.
inline NoiseSource gaussian_noise(StepScalar qc_rate) {
    return [qc_rate](const TimeGrid& g, Rng& rng) {
        NoiseDraw d;
        d.inc.dm.resize(g.steps());
        d.inc.d_qc.resize(g.steps());
        std::vector<double> none;
        for (std::size_t i = 1; i <= g.steps(); ++i) {
            double q = qc_rate(make_context(g, i, none, 0)) * g.dK(i);
            d.inc.d_qc[i - 1] = q;
            d.inc.dm[i - 1] = std::sqrt(q) * rng.normal();
        }
        return d;
    };
}

namespace detail {

inline const std::map<std::string, std::map<std::string, double>>& model_defaults() {
    static const std::map<std::string, std::map<std::string, double>> d{
        {"linear_standard", {{"alpha", 1.0}, {"beta", 1.0}, {"sigma", 1.0}, {"z0", 1.0}}},
        {"linear_slow_gain", {{"alpha", 1.0}, {"beta", 1.0}, {"sigma", 1.0}, {"r", 0.6}, {"z0", 1.0}}},
        {"rm_slow_gain",
         {{"alpha", 0.5}, {"beta", 1.0}, {"sigma", 1.0}, {"r", 0.9}, {"c", 0.1}, {"z0", 1.0}}},
        {"galton_watson", {{"theta", 1.0}, {"theta0", 0.0}}},
        {"deterministic_regression", {{"a", 1.0}, {"b", 1.0}, {"sigma", 1.0}, {"z0", 1.0}}},
        {"custom", {{"b", 1.0}, {"p", 1.0}, {"s", 1.0}, {"q", 1.0}, {"z0", 1.0}}},
    };
    return d;
}

inline void require(bool ok, const std::string& model, const std::string& inequality) {
    if (!ok) throw ValidationError(model + " requires " + inequality);
}

}  // namespace detail

inline std::vector<std::string> model_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : detail::model_defaults()) out.push_back(k);
    return out;
}

// Fills defaults and rejects unknown names and parameters.
inline ModelId complete_model_id(const ModelId& in) {
    const auto& all = detail::model_defaults();
    auto it = all.find(in.name);
    if (it == all.end()) throw ValidationError("unknown model '" + in.name + "'");
    ModelId out{in.name, it->second};
    for (const auto& [k, v] : in.params) {
        if (!it->second.count(k)) throw ValidationError("model " + in.name + " has no parameter '" + k + "'");
        if (!std::isfinite(v)) throw ValidationError("model parameter '" + k + "' must be finite");
        out.params[k] = v;
    }
    return out;
}

inline ModelSpec build_model(const ModelId& requested) {
    ModelId id = complete_model_id(requested);
    const auto& p = id.params;
    const std::string& n = id.name;
    ModelSpec m;
    m.id = id;
    m.qc_rate = [](const StepContext&) { return 1.0; };

    if (n == "linear_standard") {
        double a = p.at("alpha"), b = p.at("beta"), s = p.at("sigma");
        detail::require(a * b > 0.0, n, "alpha*beta>0");
        detail::require(2.0 * a * b > 1.0, n, "2*alpha*beta>1");
        detail::require(s >= 0.0, n, "sigma>=0");
        m.beta = [a, b](const StepContext& c) { return a * b / (1.0 + c.K); };
        m.drift = [a, b](const StepContext& c, double u) { return -a * b / (1.0 + c.K) * u; };
        m.noise_coeff = [a, s](const StepContext& c, double) { return a * s / (1.0 + c.K); };
        m.gamma = [](const StepContext& c) { return 1.0 + c.K + c.dK; };
        m.z0 = p.at("z0");
    } else if (n == "linear_slow_gain" || n == "rm_slow_gain") {
        double a = p.at("alpha"), b = p.at("beta"), s = p.at("sigma"), r = p.at("r");
        detail::require(r > 0.5 && r < 1.0, n, "1/2<r<1");
        detail::require(a > 0.0 && b > 0.0, n, "alpha>0 and beta>0");
        detail::require(s >= 0.0, n, "sigma>=0");
        if (n == "rm_slow_gain") {
            detail::require(a < 1.0, n, "0<alpha<1");
            double cq = p.at("c");
            // H = −α R(u)/(1+K)^r with R(u) = βu − c u².
            m.drift = [a, b, r, cq](const StepContext& c, double u) {
                return -a * (b * u - cq * u * u) * std::pow(1.0 + c.K, -r);
            };
            m.beta_field = [a, b, r, cq](const StepContext& c, double u) {
                return a * (b - cq * u) * std::pow(1.0 + c.K, -r);
            };
        } else {
            m.drift = [a, b, r](const StepContext& c, double u) { return -a * b * std::pow(1.0 + c.K, -r) * u; };
        }
        m.beta = [a, b, r](const StepContext& c) { return a * b * std::pow(1.0 + c.K, -r); };
        m.noise_coeff = [a, s, r](const StepContext& c, double) { return a * s * std::pow(1.0 + c.K, -r); };
        m.gamma = [r](const StepContext& c) { return std::pow(1.0 + c.K + c.dK, r); };
        m.z0 = p.at("z0");
    } else if (n == "galton_watson") {
        double th = p.at("theta");
        detail::require(th > 0.0, n, "theta>0");
        m.discrete_clock = true;
        m.cov_dim = 2;  // X_{n-1}, S_n = X_0 + … + X_{n-1}
        m.beta = [](const StepContext& c) { return c.cov[0] / c.cov[1]; };
        m.drift = [](const StepContext& c, double u) { return -u * c.cov[0] / c.cov[1]; };
        m.noise_coeff = [](const StepContext& c, double) { return 1.0 / c.cov[1]; };
        m.qc_rate = [th](const StepContext& c) { return th * c.cov[0]; };
        m.gamma = [](const StepContext& c) { return c.cov[1]; };
        m.z0 = p.at("theta0") - th;
        m.noise = [th](const TimeGrid& g, Rng& rng) {
            NoiseDraw d;
            std::size_t N = g.steps();
            d.inc.dm.resize(N);
            d.inc.d_qc.resize(N);
            d.cov.resize(2 * N);
            d.observed.resize(N + 1);
            double x = 1.0, s = 0.0;
            d.observed[0] = x;
            for (std::size_t i = 1; i <= N; ++i) {
                s += x;
                d.cov[2 * (i - 1)] = x;
                d.cov[2 * (i - 1) + 1] = s;
                double next = std::isfinite(x) ? gw_transition(th, x, rng) : x;
                d.inc.dm[i - 1] = next - 1.0 - th * x;
                d.inc.d_qc[i - 1] = th * x;
                d.observed[i] = next;
                x = next;
            }
            return d;
        };
    } else if (n == "deterministic_regression") {
        double a = p.at("a"), b = p.at("b"), s = p.at("sigma");
        detail::require(a > 0.0 && b > 0.0, n, "a>0 and b>0");
        detail::require(s >= 0.0, n, "sigma>=0");
        // gain a/(1+K), R(u) = −b u/(1+|u|).
        m.drift = [a, b](const StepContext& c, double u) {
            return a / (1.0 + c.K) * (-b * u / (1.0 + std::abs(u)));
        };
        m.beta_field = [a, b](const StepContext& c, double u) {
            return a * b / ((1.0 + c.K) * (1.0 + std::abs(u)));
        };
        m.beta = [a, b](const StepContext& c) { return a * b / (1.0 + c.K); };
        m.noise_coeff = [a, s](const StepContext& c, double) { return a * s / (1.0 + c.K); };
        m.gamma = [](const StepContext& c) { return 1.0 + c.K + c.dK; };
        m.z0 = p.at("z0");
    } else {  // custom linear power law
        double b = p.at("b"), pw = p.at("p"), s = p.at("s"), q = p.at("q");
        detail::require(b > 0.0, n, "b>0");
        detail::require(pw > 0.0 && pw <= 1.0, n, "0<p<=1");
        detail::require(s >= 0.0, n, "s>=0");
        m.beta = [b, pw](const StepContext& c) { return b * std::pow(1.0 + c.K, -pw); };
        m.drift = [b, pw](const StepContext& c, double u) { return -b * std::pow(1.0 + c.K, -pw) * u; };
        m.noise_coeff = [s, q](const StepContext& c, double) { return s * std::pow(1.0 + c.K, -q); };
        m.gamma = [pw](const StepContext& c) { return std::pow(1.0 + c.K + c.dK, pw); };
        m.z0 = p.at("z0");
    }
    if (!m.noise) m.noise = gaussian_noise(m.qc_rate);
    return m;
}

}  // namespace sa_lab
