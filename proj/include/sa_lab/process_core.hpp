#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "error.hpp"

namespace sa_lab {

// The shared clock: time points, integrator increments dK and jump flags.
// Step i runs from times[i-1] to times[i], i = 1..N; per-step vectors are
// stored 0-based, so dK[i-1] belongs to step i.
class TimeGrid {
public:
    TimeGrid(std::vector<double> times, std::vector<double> dK, std::vector<bool> jump)
        : times_(std::move(times)), dK_(std::move(dK)), jump_(std::move(jump)) {
        if (times_.empty() || times_.front() != 0.0)
            throw ValidationError("time grid must start at t_0 = 0");
        if (dK_.size() + 1 != times_.size() || jump_.size() != dK_.size())
            throw ShapeError("time grid: dK and jump_flag need one entry per step");
        K_.assign(times_.size(), 0.0);
        for (std::size_t i = 1; i < times_.size(); ++i) {
            if (!(times_[i] > times_[i - 1]))
                throw ValidationError("time grid: times must be strictly increasing (step " +
                                      std::to_string(i) + ")");
            if (!(dK_[i - 1] >= 0.0))
                throw ValidationError("time grid: dK must be >= 0 (step " + std::to_string(i) + ")");
            K_[i] = K_[i - 1] + dK_[i - 1];
        }
    }

    // Euler grid on [0, T] with K_t = t; the last step is shortened to hit T.
    static TimeGrid uniform(double T, double dt) {
        if (!(T > 0.0) || !(dt > 0.0)) throw ValidationError("uniform grid requires T > 0 and dt > 0");
        auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
        std::vector<double> t(n + 1), dk(n);
        for (std::size_t i = 1; i <= n; ++i) t[i] = (i == n) ? T : static_cast<double>(i) * dt;
        for (std::size_t i = 1; i <= n; ++i) dk[i - 1] = t[i] - t[i - 1];
        return TimeGrid(std::move(t), std::move(dk), std::vector<bool>(n, false));
    }

    // Pure discrete time: n unit jumps.
    static TimeGrid discrete(std::size_t n) {
        if (n == 0) throw ValidationError("discrete grid requires at least one step");
        std::vector<double> t(n + 1);
        for (std::size_t i = 0; i <= n; ++i) t[i] = static_cast<double>(i);
        return TimeGrid(std::move(t), std::vector<double>(n, 1.0), std::vector<bool>(n, true));
    }

    // Continuous grid with step min(max_dt, rel * (1 + t)); cheap long horizons
    // for deterministic fixtures.
    static TimeGrid geometric(double T, double rel, double max_dt = 1.0) {
        if (!(T > 0.0) || !(rel > 0.0)) throw ValidationError("geometric grid requires T > 0 and rel > 0");
        std::vector<double> t{0.0};
        while (t.back() < T) {
            double step = std::min(max_dt, rel * (1.0 + t.back()));
            double next = t.back() + step;
            if (next > T || T - next < 1e-9 * step) next = T;
            t.push_back(next);
        }
        std::vector<double> dk(t.size() - 1);
        for (std::size_t i = 1; i < t.size(); ++i) dk[i - 1] = t[i] - t[i - 1];
        return TimeGrid(std::move(t), std::move(dk), std::vector<bool>(dk.size(), false));
    }

    std::size_t points() const { return times_.size(); }
    std::size_t steps() const { return dK_.size(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& dK() const { return dK_; }
    const std::vector<bool>& jump() const { return jump_; }
    const std::vector<double>& K() const { return K_; }

    double t(std::size_t i) const { return times_[i]; }
    double dK(std::size_t step) const { return dK_[step - 1]; }
    bool jump(std::size_t step) const { return jump_[step - 1]; }
    double K(std::size_t i) const { return K_[i]; }
    double horizon() const { return times_.back(); }

    bool operator==(const TimeGrid& o) const {
        return times_ == o.times_ && dK_ == o.dK_ && jump_ == o.jump_;
    }

private:
    std::vector<double> times_, dK_;
    std::vector<bool> jump_;
    std::vector<double> K_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

inline GridPtr share(TimeGrid g) { return std::make_shared<const TimeGrid>(std::move(g)); }

struct SamplePath {
    GridPtr grid;
    std::vector<double> values;
    std::optional<std::size_t> divergence;

    SamplePath() = default;
    SamplePath(GridPtr g, std::vector<double> v, std::optional<std::size_t> div = std::nullopt)
        : grid(std::move(g)), values(std::move(v)), divergence(div) {
        if (!grid || values.size() != grid->points())
            throw ShapeError("sample path needs one value per grid point");
    }
    SamplePath(GridPtr g, double fill) : SamplePath(g, std::vector<double>(g->points(), fill)) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    double back() const { return values.back(); }
};

// Noise increments dm and their quadratic-characteristic increments, per step.
struct IncrementStream {
    std::vector<double> dm;
    std::vector<double> d_qc;
};

inline void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what) {
    if (a != b && !(a && b && *a == *b)) throw ShapeError(std::string(what) + ": grid mismatch");
}

// Left-point rule: result_i = result_{i-1} + f_{i-1} * incr_i.
template <class Increments>
SamplePath stochastic_integral(const SamplePath& integrand, const Increments& increments) {
    const auto& g = integrand.grid;
    if (!g || std::size(increments) != g->steps())
        throw ShapeError("stochastic_integral: increments do not match the integrand's grid");
    std::vector<double> out(g->points(), 0.0);
    auto it = std::begin(increments);
    for (std::size_t i = 1; i < out.size(); ++i, ++it) out[i] = out[i - 1] + integrand[i - 1] * (*it);
    return SamplePath(g, std::move(out));
}

inline SamplePath stochastic_integral(const SamplePath& integrand, const SamplePath& integrator) {
    require_same_grid(integrand.grid, integrator.grid, "stochastic_integral");
    std::vector<double> d(integrator.size() - 1);
    for (std::size_t i = 1; i < integrator.size(); ++i) d[i - 1] = integrator[i] - integrator[i - 1];
    return stochastic_integral(integrand, d);
}

// ε_t(−r∘K): exp(−rΔK) on continuous steps, (1 − rΔK) on jump steps.
inline SamplePath dolean_exponential(const std::vector<double>& r, const GridPtr& grid) {
    if (r.size() != grid->steps()) throw ShapeError("dolean_exponential: one rate per step required");
    std::vector<double> v(grid->points(), 1.0);
    for (std::size_t i = 1; i < v.size(); ++i) {
        double x = r[i - 1] * grid->dK(i);
        v[i] = v[i - 1] * (grid->jump(i) ? (1.0 - x) : std::exp(-x));
    }
    return SamplePath(grid, std::move(v));
}

// Pointwise reciprocal of dolean_exponential; a zero jump factor is an error.
inline SamplePath inverse_exponential(const std::vector<double>& r, const GridPtr& grid) {
    if (r.size() != grid->steps()) throw ShapeError("inverse_exponential: one rate per step required");
    for (std::size_t i = 1; i <= grid->steps(); ++i)
        if (grid->jump(i) && 1.0 - r[i - 1] * grid->dK(i) == 0.0)
            throw NumericError("inverse_exponential: zero factor at step " + std::to_string(i) +
                               " (beta dK = 1 jump not excised)");
    SamplePath e = dolean_exponential(r, grid);
    for (auto& v : e.values) v = 1.0 / v;
    return e;
}

// Log of the positive Dolean exponential ε(+g∘K), for averaging weights.
inline std::vector<double> log_positive_exponential(const std::vector<double>& g, const TimeGrid& grid) {
    if (g.size() != grid.steps()) throw ShapeError("weight density: one value per step required");
    std::vector<double> out(grid.points(), 0.0);
    for (std::size_t i = 1; i < out.size(); ++i) {
        double x = g[i - 1] * grid.dK(i);
        out[i] = out[i - 1] + (grid.jump(i) ? std::log1p(x) : x);
    }
    return out;
}

}  // namespace sa_lab
