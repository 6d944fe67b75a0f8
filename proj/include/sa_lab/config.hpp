#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "error.hpp"
#include "models.hpp"
#include "montecarlo.hpp"

namespace sa_lab {

struct ConfigError : Error {
    ConfigError(std::size_t line, const std::string& w)
        : Error("config", (line ? "line " + std::to_string(line) + ": " : std::string()) + w), line(line) {}
    std::size_t line;
};

struct VerifySettings {
    double delta = 0.0;
    double delta0 = 1.0;
    double epsilon = 0.25;
    bool operator==(const VerifySettings&) const = default;
};

struct RunConfig {
    std::string subcommand = "simulate";
    ModelId model;
    GridSpec grid;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::size_t replications = 100;
    std::vector<StatSpec> statistics{StatSpec{StatKind::z_terminal, 0.0, std::nullopt}, StatSpec{StatKind::zbar_terminal, 0.0, std::nullopt}};
    std::string weight = "alpha";
    bool predictions = true;
    VerifySettings verify;
    ClassifierThresholds thresholds;

    std::vector<std::string> defaulted;  // "section.key=value" for every default applied

    bool operator==(const RunConfig& o) const {
        return subcommand == o.subcommand && model == o.model && grid == o.grid && seed == o.seed &&
               out_dir == o.out_dir && replications == o.replications && statistics == o.statistics &&
               weight == o.weight && predictions == o.predictions && verify == o.verify &&
               thresholds == o.thresholds;
    }
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"simulate", "decompose", "average", "verify", "mc"};
    return s;
}

// Default (δ₀, δ, ε) for the rate and expansion checks.
inline VerifySettings default_verify(const ModelId& id) {
    VerifySettings v;
    if (id.name == "linear_slow_gain" || id.name == "rm_slow_gain") v.delta0 = 2.0 - 1.0 / id.params.at("r");
    v.delta = v.delta0 / 2.0;
    v.epsilon = 0.5 - v.delta0 / 4.0;
    return v;
}

namespace detail {

struct Entry {
    std::string value;
    std::size_t line;
};

inline std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

class Sections {
public:
    std::map<std::string, std::map<std::string, Entry>> data;

    bool has(const std::string& sec, const std::string& key) const {
        auto it = data.find(sec);
        return it != data.end() && it->second.count(key);
    }
    const Entry& at(const std::string& sec, const std::string& key) const { return data.at(sec).at(key); }
};

inline double to_double(const Entry& e, const std::string& key) {
    try {
        std::size_t used = 0;
        double v = std::stod(e.value, &used);
        if (used != e.value.size() || !std::isfinite(v)) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(e.line, "'" + key + "' expects a number, got '" + e.value + "'");
    }
}

inline std::uint64_t to_u64(const Entry& e, const std::string& key) {
    try {
        if (e.value.empty() || e.value[0] == '-' || e.value[0] == '+') throw std::invalid_argument("");
        std::size_t used = 0;
        auto v = std::stoull(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(e.line, "'" + key + "' expects a nonnegative integer, got '" + e.value + "'");
    }
}

inline bool to_bool(const Entry& e, const std::string& key) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    throw ConfigError(e.line, "'" + key + "' expects true or false, got '" + e.value + "'");
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
    static const std::map<std::string, std::vector<std::string>> allowed{
        {"run", {"subcommand", "seed", "out"}},
        {"grid", {"mode", "T", "dt", "steps"}},
        {"mc", {"replications", "statistics", "weight", "predictions"}},
        {"verify", {"delta", "delta0", "epsilon"}},
        {"thresholds", {"finite_rel", "divergent_rel", "decade_ratio"}},
    };
    detail::Sections s;
    std::istringstream in(text);
    std::string raw, section;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find_first_of("#;");
        std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(lineno, "malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "model" && !allowed.count(section))
                throw ConfigError(lineno, "unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(lineno, "expected key = value");
        std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError(lineno, "key '" + key + "' outside of a section");
        if (key.empty()) throw ConfigError(lineno, "empty key");
        if (section != "model") {
            const auto& keys = allowed.at(section);
            if (std::find(keys.begin(), keys.end(), key) == keys.end())
                throw ConfigError(lineno, "unknown key '" + key + "' in [" + section + "]");
        }
        if (s.has(section, key)) throw ConfigError(lineno, "duplicate key '" + key + "'");
        s.data[section][key] = {value, lineno};
    }

    RunConfig c;
    auto note = [&](const std::string& sec, const std::string& key, const std::string& v) {
        c.defaulted.push_back(sec + "." + key + "=" + v);
    };
    auto get_d = [&](const std::string& sec, const std::string& key, double def) {
        if (s.has(sec, key)) return detail::to_double(s.at(sec, key), key);
        note(sec, key, format_double(def));
        return def;
    };
    auto get_u = [&](const std::string& sec, const std::string& key, std::uint64_t def) {
        if (s.has(sec, key)) return detail::to_u64(s.at(sec, key), key);
        note(sec, key, std::to_string(def));
        return def;
    };
    auto get_s = [&](const std::string& sec, const std::string& key, const std::string& def) {
        if (s.has(sec, key)) return s.at(sec, key).value;
        note(sec, key, def);
        return def;
    };
    auto line_of = [&](const std::string& sec, const std::string& key) -> std::size_t {
        return s.has(sec, key) ? s.at(sec, key).line : 0;
    };

    c.subcommand = get_s("run", "subcommand", "simulate");
    if (std::find(subcommands().begin(), subcommands().end(), c.subcommand) == subcommands().end())
        throw ConfigError(line_of("run", "subcommand"), "unknown subcommand '" + c.subcommand + "'");
    c.seed = get_u("run", "seed", 0);
    c.out_dir = get_s("run", "out", "out");

    if (!s.has("model", "name")) throw ConfigError(0, "missing required key 'name' in [model]");
    c.model.name = s.at("model", "name").value;
    std::size_t model_line = s.at("model", "name").line;
    ModelId complete;
    try {
        complete = complete_model_id(ModelId{c.model.name, {}});
    } catch (const ValidationError& e) {
        throw ConfigError(model_line, e.what());
    }
    if (s.data.count("model"))
        for (const auto& [k, e] : s.data.at("model")) {
            if (k == "name") continue;
            if (!complete.params.count(k))
                throw ConfigError(e.line, "unknown key '" + k + "' for model " + c.model.name);
            c.model.params[k] = detail::to_double(e, k);
        }
    for (const auto& [k, v] : complete.params)
        if (!c.model.params.count(k)) {
            c.model.params[k] = v;
            note("model", k, format_double(v));
        }
    try {
        build_model(c.model);
    } catch (const ValidationError& e) {
        throw ConfigError(model_line, e.what());
    }

    bool gw = c.model.name == "galton_watson";
    c.grid.mode = get_s("grid", "mode", gw ? "discrete" : "continuous");
    if (c.grid.mode != "continuous" && c.grid.mode != "discrete")
        throw ConfigError(line_of("grid", "mode"), "grid mode must be continuous or discrete");
    if (gw && c.grid.mode != "discrete")
        throw ConfigError(line_of("grid", "mode"), "galton_watson runs on a discrete grid");
    c.grid.T = get_d("grid", "T", 1000.0);
    if (!(c.grid.T > 0.0)) throw ConfigError(line_of("grid", "T"), "T must be > 0");
    c.grid.dt = get_d("grid", "dt", 0.01);
    if (!(c.grid.dt > 0.0)) throw ConfigError(line_of("grid", "dt"), "dt must be > 0");
    {
        std::uint64_t st = get_u("grid", "steps", 1000);
        if (st == 0) throw ConfigError(line_of("grid", "steps"), "steps must be >= 1");
        c.grid.steps = static_cast<std::size_t>(st);
    }

    if (s.has("mc", "replications")) {
        const auto& e = s.at("mc", "replications");
        if (!e.value.empty() && e.value[0] == '-') throw ConfigError(e.line, "replications must be >= 2");
        c.replications = static_cast<std::size_t>(detail::to_u64(e, "replications"));
        if (c.replications < 2) throw ConfigError(e.line, "replications must be >= 2");
    } else {
        note("mc", "replications", std::to_string(c.replications));
    }
    if (s.has("mc", "statistics")) {
        const auto& e = s.at("mc", "statistics");
        c.statistics.clear();
        std::istringstream ss(e.value);
        std::string item;
        try {
            while (std::getline(ss, item, ',')) {
                item = detail::trim(item);
                if (!item.empty()) c.statistics.push_back(parse_stat(item));
            }
        } catch (const ValidationError& err) {
            throw ConfigError(e.line, err.what());
        }
        if (c.statistics.empty()) throw ConfigError(e.line, "statistics list is empty");
    } else {
        note("mc", "statistics", "z_terminal,zbar_terminal");
    }
    c.weight = get_s("mc", "weight", "alpha");
    if (c.weight != "alpha" && c.weight != "plain")
        throw ConfigError(line_of("mc", "weight"), "weight must be alpha or plain");
    if (s.has("mc", "predictions")) c.predictions = detail::to_bool(s.at("mc", "predictions"), "predictions");
    else note("mc", "predictions", "true");

    VerifySettings dv = default_verify(c.model);
    c.verify.delta0 = get_d("verify", "delta0", dv.delta0);
    c.verify.delta = get_d("verify", "delta", c.verify.delta0 / 2.0);
    c.verify.epsilon = get_d("verify", "epsilon", 0.5 - c.verify.delta0 / 4.0);
    if (!(c.verify.delta > 0.0 && c.verify.delta < c.verify.delta0 && c.verify.delta0 <= 1.0))
        throw ConfigError(line_of("verify", "delta"), "verify requires 0<delta<delta0<=1");
    if (!(c.verify.epsilon > 0.5 - c.verify.delta0 / 2.0 && c.verify.epsilon < 0.5))
        throw ConfigError(line_of("verify", "epsilon"), "verify requires 1/2-delta0/2<epsilon<1/2");

    c.thresholds.finite_rel = get_d("thresholds", "finite_rel", 0.01);
    c.thresholds.divergent_rel = get_d("thresholds", "divergent_rel", 0.10);
    c.thresholds.decade_ratio = get_d("thresholds", "decade_ratio", 0.5);
    if (!(c.thresholds.finite_rel > 0.0 && c.thresholds.finite_rel <= c.thresholds.divergent_rel))
        throw ConfigError(line_of("thresholds", "finite_rel"), "thresholds require 0<finite_rel<=divergent_rel");
    return c;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(0, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string emit_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[run]\nsubcommand = " << c.subcommand << "\nseed = " << c.seed << "\nout = " << c.out_dir << "\n\n";
    os << "[model]\nname = " << c.model.name << '\n';
    for (const auto& [k, v] : c.model.params) os << k << " = " << format_double(v) << '\n';
    os << "\n[grid]\nmode = " << c.grid.mode << "\nT = " << format_double(c.grid.T)
       << "\ndt = " << format_double(c.grid.dt) << "\nsteps = " << c.grid.steps << "\n\n";
    os << "[mc]\nreplications = " << c.replications << "\nstatistics = ";
    for (std::size_t i = 0; i < c.statistics.size(); ++i) os << (i ? ", " : "") << stat_name(c.statistics[i]);
    os << "\nweight = " << c.weight << "\npredictions = " << (c.predictions ? "true" : "false") << "\n\n";
    os << "[verify]\ndelta = " << format_double(c.verify.delta) << "\ndelta0 = " << format_double(c.verify.delta0)
       << "\nepsilon = " << format_double(c.verify.epsilon) << "\n\n";
    os << "[thresholds]\nfinite_rel = " << format_double(c.thresholds.finite_rel)
       << "\ndivergent_rel = " << format_double(c.thresholds.divergent_rel)
       << "\ndecade_ratio = " << format_double(c.thresholds.decade_ratio) << '\n';
    return os.str();
}

// FNV-1a over the canonical emitted form.
inline std::uint64_t config_hash(const RunConfig& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : emit_config(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace sa_lab
