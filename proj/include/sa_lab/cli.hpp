#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "asymptotics.hpp"
#include "config.hpp"
#include "constants.hpp"
#include "diagnostics.hpp"
#include "montecarlo.hpp"
#include "rm_engine.hpp"

namespace sa_lab {

struct DispatchOptions {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

namespace detail {

inline std::string header_line(const RunConfig& c) {
    std::ostringstream os;
    os << "# sa-lab " << kVersion << " config_hash=" << std::hex << std::setw(16) << std::setfill('0')
       << config_hash(c) << std::dec << " seed=" << c.seed;
    return os.str();
}

class Output {
public:
    Output(const RunConfig& c, std::filesystem::path dir) : cfg_(c), dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error("io", "cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    std::ofstream open(const std::string& name) {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw Error("io", "cannot write '" + (dir_ / name).string() + "'");
        f << header_line(cfg_) << '\n';
        return f;
    }

    std::ofstream report(const std::string& name = "report.txt") {
        auto f = open(name);
        f << "subcommand " << cfg_.subcommand << ", model " << cfg_.model.name << '\n';
        for (const auto& d : cfg_.defaulted) f << "default " << d << '\n';
        return f;
    }

private:
    const RunConfig& cfg_;
    std::filesystem::path dir_;
};

inline void write_row(std::ostream& os, std::initializer_list<double> vals) {
    bool first = true;
    for (double v : vals) {
        if (!first) os << ',';
        os << format_double(v);
        first = false;
    }
    os << '\n';
}

inline void check_written(std::ofstream& f, const std::string& what) {
    f.flush();
    if (!f) throw Error("io", "write failed for " + what);
}

}  // namespace detail

inline void dispatch(const RunConfig& c, const DispatchOptions& opt, std::ostream& log) {
    auto model = std::make_shared<const ModelSpec>(build_model(c.model));
    auto grid = share(build_grid(c.grid, *model));
    detail::Output out(c, opt.out_dir.value_or(c.out_dir));
    const auto& sub = c.subcommand;

    if (sub == "mc") {
        McConfig mc;
        mc.model = c.model;
        mc.grid = c.grid;
        mc.replications = c.replications;
        mc.master_seed = c.seed;
        mc.statistics = c.statistics;
        mc.weight_kind = c.weight;
        mc.use_predictions = c.predictions;
        mc.threads = opt.threads;
        McSummary s = run_replications(mc);
        auto f = out.open("mc_summary.csv");
        write_summary_csv(f, s);
        detail::check_written(f, "mc_summary.csv");
        auto r = out.report("mc_report.txt");
        write_summary_text(r, s);
        write_summary_text(log, s);
        return;
    }

    RmRun run = simulate(model, grid, c.seed);
    if (sub == "simulate") {
        auto f = out.open("path.csv");
        bool obs = !run.observed.empty();
        f << "time,K,z" << (obs ? ",observed" : "") << '\n';
        for (std::size_t i = 0; i < grid->points(); ++i) {
            f << format_double(grid->t(i)) << ',' << format_double(grid->K(i)) << ',' << format_double(run.z[i]);
            if (obs) f << ',' << format_double(run.observed[i]);
            f << '\n';
        }
        detail::check_written(f, "path.csv");
        auto r = out.report();
        r << "steps " << grid->steps() << ", z_T " << format_double(run.z.back());
        if (run.divergence) r << ", diverged at step " << *run.divergence;
        r << '\n';
        log << "wrote path.csv (" << grid->points() << " rows)\n";
        return;
    }

    if (sub == "verify") {
        std::vector<ConditionReport> reps;
        FieldView f = FieldView::of(run);
        const auto& th = c.thresholds;
        reps.push_back(check_drift_sign(f, default_sign_u_grid()));
        reps.push_back(check_qc_bound(f, th));
        for (auto& x : check_group_I(f, th)) reps.push_back(std::move(x));
        for (auto& x : check_group_II(f, th)) reps.push_back(std::move(x));
        for (auto& x : check_S1_S2(f, epsilon_u_grid(0.01), th)) reps.push_back(std::move(x));
        for (auto& x : check_rate_conditions(f, run.z.values, c.verify.delta, c.verify.delta0, th))
            reps.push_back(std::move(x));
        auto mon = rate_monitor_verdict(rate_monitor(run, gamma_path(run), c.verify.delta));
        reps.push_back(std::move(mon));
        std::string skipped;
        if (!run.divergence) {
            Decomposition d = asymptotic_decomposition(run);
            for (auto& x : check_expansion_conditions(run, d, c.verify.epsilon, c.verify.delta0, th))
                reps.push_back(std::move(x));
            for (auto& x : check_averaging_conditions(run, d, alpha_weight(d), c.verify.delta0, th))
                reps.push_back(std::move(x));
        } else {
            skipped = "run diverged at step " + std::to_string(*run.divergence) +
                      "; expansion and averaging checks skipped\n";
        }
        auto csv = out.open("conditions.csv");
        write_reports_csv(csv, reps);
        detail::check_written(csv, "conditions.csv");
        auto r = out.report();
        r << skipped;
        write_reports_text(r, reps);
        for (const auto& a : audit_implications(reps))
            r << "audit (" << a.premise << ") => (" << a.conclusion << "): "
              << (a.consistent() ? "consistent" : "INCONSISTENT") << '\n';
        write_reports_text(log, reps);
        return;
    }

    if (run.divergence)
        throw NumericError("run diverged at step " + std::to_string(*run.divergence) + "; nothing to " + sub);
    Decomposition d = asymptotic_decomposition(run);

    if (sub == "decompose") {
        auto s = decompose_z_squared(run, Representation::standard);
        auto n = decompose_z_squared(run, Representation::nonstandard);
        auto f = out.open("decomposition.csv");
        f << "time,K,z,A1_standard,A2_standard,N_standard,A1_nonstandard,A2_nonstandard,N_nonstandard,"
             "Gamma,L,L_qc,chi,R,R1,R2,R3\n";
        for (std::size_t i = 0; i < grid->points(); ++i) {
            f << format_double(grid->t(i)) << ',';
            detail::write_row(f, {grid->K(i), run.z[i], s.A1[i], s.A2[i], s.mart_residual[i], n.A1[i], n.A2[i],
                                  n.mart_residual[i], d.Gamma[i], d.L[i], d.L_qc[i], d.chi[i], d.R[i],
                                  d.R_parts[0][i], d.R_parts[1][i], d.R_parts[2][i]});
        }
        detail::check_written(f, "decomposition.csv");
        auto r = out.report();
        r << "reconstruction error " << format_double(d.reconstruction_error) << '\n';
        log << "wrote decomposition.csv\n";
        return;
    }

    // average
    SamplePath eps = c.weight == "plain" ? plain_weight(grid) : alpha_weight(d);
    AveragingResult a = polyak_average(run.z, eps, c.weight);
    auto f = out.open("average.csv");
    f << "time,K,z,zbar,eps\n";
    for (std::size_t i = 0; i < grid->points(); ++i) {
        f << format_double(grid->t(i)) << ',';
        detail::write_row(f, {grid->K(i), run.z[i], a.zbar[i], a.eps[i]});
    }
    detail::check_written(f, "average.csv");
    auto r = out.report();
    r << "weight " << c.weight << ", zbar_T " << format_double(a.zbar.back()) << '\n';
    log << "wrote average.csv\n";
}

inline unsigned resolve_threads(std::optional<unsigned> flag) {
    if (flag && *flag > 0) return *flag;
    if (const char* env = std::getenv("SA_LAB_THREADS")) {
        try {
            std::size_t used = 0;
            unsigned long v = std::stoul(env, &used);
            if (used == std::string(env).size() && v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw ValidationError("SA_LAB_THREADS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline std::string error_line(const std::string& kind, std::string msg) {
    for (char& ch : msg)
        if (ch == '\n') ch = ' ';
    return "error: kind=" + kind + " message=" + msg;
}

// Returns the process exit status. Errors go to `err` as one machine-parsable line.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"sa-lab: stochastic approximation laboratory"};
    app.set_version_flag("--version", std::string(kVersion));
    std::string sub, config_path, out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    app.add_option("subcommand", sub, "simulate | decompose | average | verify | mc")
        ->required()
        ->check(CLI::IsMember(subcommands()));
    app.add_option("--config", config_path, "config file")->required();
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    auto* thr_opt = app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << error_line("usage", e.what()) << '\n';
        return 2;
    }
    try {
        RunConfig cfg = parse_config(config_path);
        if (cfg.subcommand != sub) {
            if (std::find(cfg.defaulted.begin(), cfg.defaulted.end(), "run.subcommand=simulate") ==
                cfg.defaulted.end())
                out << "note: command line subcommand '" << sub << "' overrides config '" << cfg.subcommand
                    << "'\n";
            cfg.subcommand = sub;
        }
        if (*seed_opt) cfg.seed = seed;
        DispatchOptions opt;
        if (*out_opt) opt.out_dir = out_dir;
        opt.threads = resolve_threads(*thr_opt ? std::optional<unsigned>(threads) : std::nullopt);
        out << detail::header_line(cfg) << '\n';
        for (const auto& d : cfg.defaulted) out << "default " << d << '\n';
        dispatch(cfg, opt, out);
        return 0;
    } catch (const Error& e) {
        err << error_line(e.kind(), e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << error_line("internal", e.what()) << '\n';
        return 1;
    }
}

}  // namespace sa_lab
