#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>

#include "constants.hpp"
#include "models.hpp"
#include "process_core.hpp"
#include "rng.hpp"

namespace sa_lab {

using ModelPtr = std::shared_ptr<const ModelSpec>;

struct RmRun {
    ModelPtr model;
    GridPtr grid;
    SamplePath z;
    IncrementStream noise;
    std::vector<double> cov;
    std::vector<double> observed;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::optional<std::size_t> divergence;

    StepContext context(std::size_t step) const { return make_context(*grid, step, cov, model->cov_dim); }
    // Number of usable steps (up to the divergence point).
    std::size_t last_step() const { return divergence ? *divergence - 1 : grid->steps(); }
};

inline void check_clock(const ModelSpec& m, const TimeGrid& g) {
    if (!m.discrete_clock) return;
    for (std::size_t i = 1; i <= g.steps(); ++i)
        if (!g.jump(i) || g.dK(i) != 1.0)
            throw ValidationError(m.id.name + " runs on its own discrete clock (unit jumps only)");
}

// Euler recursion z_i = z_{i-1} + H(z_{i-1})ΔK_i + ℓ(z_{i-1}) dm_i on a given noise draw.
inline RmRun simulate_with_noise(ModelPtr model, GridPtr grid, NoiseDraw draw) {
    check_clock(*model, *grid);
    if (draw.inc.dm.size() != grid->steps() || draw.inc.d_qc.size() != grid->steps())
        throw ShapeError("simulate: noise stream does not match the grid");
    RmRun run;
    run.model = model;
    run.grid = grid;
    run.noise = std::move(draw.inc);
    run.cov = std::move(draw.cov);
    run.observed = std::move(draw.observed);
    std::vector<double> z(grid->points(), NAN);
    z[0] = model->z0;
    for (std::size_t i = 1; i <= grid->steps(); ++i) {
        StepContext c = run.context(i);
        double u = z[i - 1];
        double h = model->drift(c, u);
        double l = model->noise_coeff(c, u);
        if (std::isnan(h) || std::isnan(l)) {
            std::ostringstream os;
            os.precision(17);
            os << "simulate: model evaluator returned NaN at step " << i << " (state z=" << u << ")";
            throw NumericError(os.str());
        }
        z[i] = u + h * c.dK + l * run.noise.dm[i - 1];
        if (!std::isfinite(z[i]) || std::abs(z[i]) > Tolerances::overflow) {
            run.divergence = i;
            break;
        }
    }
    run.z = SamplePath(grid, std::move(z), run.divergence);
    return run;
}

inline RmRun simulate(ModelPtr model, GridPtr grid, std::uint64_t seed, std::uint64_t stream = 0) {
    Rng rng(seed, stream);
    check_clock(*model, *grid);
    RmRun run = simulate_with_noise(model, grid, model->noise(*grid, rng));
    run.seed = seed;
    run.stream = stream;
    return run;
}

inline RmRun simulate(const ModelSpec& model, const TimeGrid& grid, std::uint64_t seed) {
    return simulate(std::make_shared<const ModelSpec>(model), share(grid), seed);
}

enum class Representation { standard, nonstandard };

struct ZSquaredDecomposition {
    SamplePath A1, A2, mart_residual;
    Representation representation = Representation::standard;
};

inline ZSquaredDecomposition decompose_z_squared(const RmRun& run, Representation rep) {
    if (run.divergence) throw ValidationError("decompose_z_squared: run diverged at step " +
                                              std::to_string(*run.divergence));
    const auto& g = *run.grid;
    const auto& m = *run.model;
    std::vector<double> a1(g.points(), 0.0), a2(g.points(), 0.0), res(g.points(), 0.0);
    for (std::size_t i = 1; i <= g.steps(); ++i) {
        StepContext c = run.context(i);
        double u = run.z[i - 1];
        double h = m.drift(c, u);
        double vm = 2.0 * h * u;
        double vp = c.jump ? h * h * c.dK : 0.0;
        double qc = m.qc_density(c, u, u) * c.dK;
        double d1 = qc, d2 = 0.0;
        if (rep == Representation::standard) {
            d1 += vp * (c.jump ? c.dK : 0.0);
            d2 = -vm * c.dK;
        } else if (c.jump) {
            double x = vm + vp;
            d1 += std::max(x, 0.0) * c.dK;
            d2 = std::max(-x, 0.0) * c.dK;
        } else {
            d2 = std::abs(vm) * c.dK;
        }
        a1[i] = a1[i - 1] + d1;
        a2[i] = a2[i - 1] + d2;
    }
    double z0sq = run.z[0] * run.z[0];
    for (std::size_t i = 0; i < g.points(); ++i) res[i] = run.z[i] * run.z[i] - z0sq - a1[i] + a2[i];
    return {SamplePath(run.grid, std::move(a1)), SamplePath(run.grid, std::move(a2)),
            SamplePath(run.grid, std::move(res)), rep};
}

}  // namespace sa_lab
