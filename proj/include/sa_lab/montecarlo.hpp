#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "asymptotics.hpp"
#include "diagnostics.hpp"
#include "models.hpp"
#include "rm_engine.hpp"

namespace sa_lab {

struct GridSpec {
    std::string mode = "continuous";  // continuous | discrete
    double T = 1000.0;
    double dt = 0.01;
    std::size_t steps = 1000;
    bool operator==(const GridSpec&) const = default;
};

inline TimeGrid build_grid(const GridSpec& s, const ModelSpec& m) {
    if (m.discrete_clock || s.mode == "discrete") {
        if (!m.discrete_clock && s.mode != "discrete") throw ValidationError("grid mode must be discrete");
        return TimeGrid::discrete(s.steps);
    }
    if (s.mode != "continuous") throw ValidationError("grid mode must be 'continuous' or 'discrete'");
    return TimeGrid::uniform(s.T, s.dt);
}

enum class StatKind { z_terminal, zbar_terminal, rate_monitor, remainder_R };

struct StatSpec {
    StatKind kind = StatKind::z_terminal;
    double delta = 0.0;               // rate_monitor only
    std::optional<double> at;         // evaluation time; horizon when empty
    bool operator==(const StatSpec&) const = default;
};

inline std::string stat_name(const StatSpec& s) {
    std::string n;
    switch (s.kind) {
        case StatKind::z_terminal: n = "z_terminal"; break;
        case StatKind::zbar_terminal: n = "zbar_terminal"; break;
        case StatKind::rate_monitor: n = "rate_monitor(" + format_double(s.delta) + ")"; break;
        case StatKind::remainder_R: n = "remainder_R"; break;
    }
    if (s.at) n += "@" + format_double(*s.at);
    return n;
}

inline StatSpec parse_stat(std::string text) {
    text.erase(std::remove_if(text.begin(), text.end(), ::isspace), text.end());
    StatSpec s;
    auto at = text.find('@');
    if (at != std::string::npos) {
        try {
            std::size_t used = 0;
            s.at = std::stod(text.substr(at + 1), &used);
            if (used != text.size() - at - 1 || !(*s.at > 0.0)) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ValidationError("bad statistic checkpoint in '" + text + "'");
        }
        text = text.substr(0, at);
    }
    if (text == "z_terminal") s.kind = StatKind::z_terminal;
    else if (text == "zbar_terminal") s.kind = StatKind::zbar_terminal;
    else if (text == "remainder_R") s.kind = StatKind::remainder_R;
    else if (text.rfind("rate_monitor(", 0) == 0 && text.back() == ')') {
        s.kind = StatKind::rate_monitor;
        try {
            std::size_t used = 0;
            auto inner = text.substr(13, text.size() - 14);
            s.delta = std::stod(inner, &used);
            if (used != inner.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ValidationError("bad rate_monitor delta in '" + text + "'");
        }
    } else {
        throw ValidationError("unknown statistic '" + text + "'");
    }
    return s;
}

struct McConfig {
    ModelId model;
    GridSpec grid;
    std::size_t replications = 2;
    std::uint64_t master_seed = 0;
    std::vector<StatSpec> statistics{StatSpec{}};
    std::string weight_kind = "alpha";  // alpha | plain
    bool use_predictions = true;
    unsigned threads = 1;
};

struct StatSummary {
    std::string name;
    double mean = NAN, variance = NAN, ks = NAN;
    std::optional<double> predicted;
    std::string normalizer;
    double abs_p90 = NAN;
    std::size_t n = 0, divergent = 0;
    std::vector<double> samples;
};

struct McSummary {
    std::vector<StatSummary> stats;
    std::size_t replications = 0, divergent = 0;
};

inline double normal_cdf(double x, double variance) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

inline double ks_statistic(std::vector<double> samples, double variance) {
    if (samples.size() < 20) throw ValidationError("ks_statistic needs at least 20 samples");
    if (!(variance > 0.0)) throw ValidationError("ks_statistic needs variance > 0");
    std::sort(samples.begin(), samples.end());
    double n = static_cast<double>(samples.size()), d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double F = normal_cdf(samples[i], variance);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return std::clamp(d, 0.0, 1.0);
}

// Pairwise summation keeps aggregation independent of accumulation order drift.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

inline double sample_mean(const std::vector<double>& v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

inline double sample_variance(const std::vector<double>& v) {
    double m = sample_mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

inline double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    double pos = p * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace detail {

struct RepResult {
    bool divergent = false;
    std::vector<double> values;
};

inline RepResult one_replication(const ModelPtr& model, const GridPtr& grid, const McConfig& cfg,
                                 const std::vector<double>& norm_exp, std::size_t index) {
    RmRun run = simulate(model, grid, cfg.master_seed, index);
    RepResult r;
    if (run.divergence) {
        r.divergent = true;
        return r;
    }
    std::optional<Decomposition> dec;
    std::optional<SamplePath> zbar;
    std::vector<double> gam;
    auto need_dec = [&]() -> const Decomposition& {
        if (!dec) dec = asymptotic_decomposition(run);
        return *dec;
    };
    for (std::size_t k = 0; k < cfg.statistics.size(); ++k) {
        const auto& s = cfg.statistics[k];
        std::size_t i = grid->points() - 1;
        if (s.at) i = std::min(index_at_or_before(grid->times(), *s.at), i);
        double K = grid->K(i), v = 0.0;
        switch (s.kind) {
            case StatKind::z_terminal: v = std::pow(1.0 + K, norm_exp[k]) * run.z[i]; break;
            case StatKind::zbar_terminal:
                if (!zbar) {
                    SamplePath eps = cfg.weight_kind == "plain" ? plain_weight(grid) : alpha_weight(need_dec());
                    zbar = polyak_average(run.z, eps, cfg.weight_kind).zbar;
                }
                v = std::pow(1.0 + K, norm_exp[k]) * (*zbar)[i];
                break;
            case StatKind::rate_monitor:
                if (gam.empty()) gam = gamma_path(run);
                v = std::pow(gam[i], s.delta) * run.z[i] * run.z[i];
                break;
            case StatKind::remainder_R: v = need_dec().R[i]; break;
        }
        r.values.push_back(v);
    }
    return r;
}

}  // namespace detail

inline McSummary run_replications(const McConfig& cfg) {
    if (cfg.replications < 2) throw ValidationError("replications must be >= 2");
    if (cfg.weight_kind != "alpha" && cfg.weight_kind != "plain")
        throw ValidationError("weight_kind must be 'alpha' or 'plain'");
    auto model = std::make_shared<const ModelSpec>(build_model(cfg.model));
    auto grid = share(build_grid(cfg.grid, *model));
    if (!(grid->horizon() > 0.0)) throw ValidationError("T must be > 0");

    std::vector<double> norm_exp(cfg.statistics.size(), 0.0);
    std::vector<Prediction> preds(cfg.statistics.size());
    for (std::size_t k = 0; k < cfg.statistics.size(); ++k) {
        auto kind = cfg.statistics[k].kind;
        if (kind != StatKind::z_terminal && kind != StatKind::zbar_terminal) continue;
        if (!cfg.use_predictions) continue;
        preds[k] = predicted_variance(cfg.model, kind == StatKind::z_terminal ? Statistic::z_terminal
                                                                              : Statistic::zbar_terminal);
        if (!preds[k].available)
            throw ValidationError("model " + cfg.model.name + " has no predicted variance for " +
                                  stat_name(cfg.statistics[k]) + "; disable predictions");
        norm_exp[k] = preds[k].exponent;
    }

    std::vector<detail::RepResult> results(cfg.replications);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cfg.replications) return;
            try {
                results[i] = detail::one_replication(model, grid, cfg, norm_exp, i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!failure) failure = std::current_exception();
                next = cfg.replications;
                return;
            }
        }
    };
    unsigned nt = std::max(1u, cfg.threads);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    McSummary out;
    out.replications = cfg.replications;
    for (const auto& r : results) out.divergent += r.divergent ? 1 : 0;
    if (out.divergent == cfg.replications) throw NumericError("all replications diverged");
    for (std::size_t k = 0; k < cfg.statistics.size(); ++k) {
        StatSummary s;
        s.name = stat_name(cfg.statistics[k]);
        for (const auto& r : results)
            if (!r.divergent) s.samples.push_back(r.values[k]);
        s.n = s.samples.size();
        s.divergent = out.divergent;
        s.mean = sample_mean(s.samples);
        s.variance = s.samples.size() > 1 ? sample_variance(s.samples) : NAN;
        std::vector<double> a(s.samples.size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(s.samples[i]);
        s.abs_p90 = quantile(a, 0.9);
        if (preds[k].available) {
            s.predicted = preds[k].variance;
            s.normalizer = preds[k].normalizer;
            if (preds[k].variance > 0.0 && s.n >= 20) s.ks = ks_statistic(s.samples, preds[k].variance);
        }
        out.stats.push_back(std::move(s));
    }
    return out;
}

inline void write_summary_csv(std::ostream& os, const McSummary& m) {
    os << "statistic,mean,variance,predicted,ks,n,divergent\n";
    for (const auto& s : m.stats) {
        os << s.name << ',' << format_double(s.mean) << ',' << format_double(s.variance) << ',';
        if (s.predicted) os << format_double(*s.predicted);
        os << ',';
        if (!std::isnan(s.ks)) os << format_double(s.ks);
        os << ',' << s.n << ',' << s.divergent << '\n';
    }
}

inline void write_summary_text(std::ostream& os, const McSummary& m) {
    os << "replications " << m.replications << ", divergent " << m.divergent << '\n';
    for (const auto& s : m.stats) {
        os << s.name << ": mean " << s.mean << ", variance " << s.variance;
        if (s.predicted) {
            os << " (predicted " << *s.predicted << " with normalizer " << s.normalizer;
            if (*s.predicted > 0) os << ", ratio " << s.variance / *s.predicted;
            os << ')';
        }
        if (!std::isnan(s.ks)) os << ", KS " << s.ks;
        os << ", |.| p90 " << s.abs_p90 << ", n " << s.n << '\n';
    }
}

}  // namespace sa_lab
