#pragma once

// Flat key-value experiment configuration with dotted keys, e.g.
//
//   experiment = sums
//   model.phi.kind = beta
//   model.phi.a = 2
//   model.phi.b = 2
//   model.z.kind = pareto
//   model.z.alpha = 1.5
//   model.z.sigma = 1
//   case = midstable
//   n = 1000
//   reps = 10000
//   seed = 1
//
// Unknown keys are rejected by name; '#' starts a comment.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rcinar/engine.hpp"
#include "rcinar/limitlab.hpp"

namespace rcinar {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string experiment;
    std::optional<ModelSpec> model;
    std::uint64_t n = 0;
    std::uint64_t n2 = 0;  // second horizon for self-consistency checks
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::optional<SumsCase> sums_case;
    std::string out_dir = "out";
    double epsilon = 1e-6;
    std::optional<double> gamma;
    std::uint64_t burn_in = 100000;
    unsigned workers = 0;  // 0 = automatic
    std::string mode = "series";  // stationary experiment: series | burnin | both
    std::optional<double> phi_value;  // tails experiment: thinned-tail check
    std::uint64_t x0 = 0;
    std::size_t sample_cap = 10000000;

    // Raw key-value pairs in canonical (sorted) order; basis of the config
    // hash and the manifest round-trip.
    std::map<std::string, std::string> raw;

    std::string canonical_text() const {
        std::string out;
        for (const auto& [k, v] : raw) {
            out += k;
            out += " = ";
            out += v;
            out += '\n';
        }
        return out;
    }

    StationaryConfig stationary_config(StationaryConfig::Mode m) const {
        StationaryConfig cfg;
        cfg.mode = m;
        cfg.epsilon = epsilon;
        cfg.gamma = gamma;
        cfg.burn_in_steps = burn_in;
        return cfg;
    }
};

namespace detail {

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "experiment",     "model.phi.kind", "model.phi.p",     "model.phi.a",
        "model.phi.b",    "model.phi.atoms", "model.phi.weights", "model.z.kind",
        "model.z.alpha",  "model.z.sigma",  "model.z.lambda",  "model.z.q",
        "n",              "n2",             "reps",            "seed",
        "case",           "out_dir",        "epsilon",         "gamma",
        "burn_in",        "workers",        "mode",            "phi_value",
        "x0",             "sample_cap"};
    return keys;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse number from '" + value + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse integer from '" + value +
                          "'");
    }
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

inline PhiLaw build_phi_law(const std::map<std::string, std::string>& kv) {
    const auto kind_it = kv.find("model.phi.kind");
    if (kind_it == kv.end()) throw ConfigError("missing config key 'model.phi.kind'");
    const std::string& kind = kind_it->second;
    auto get = [&kv](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing config key '" + key + "'");
        return it->second;
    };
    try {
        if (kind == "degenerate") {
            return PhiLaw::degenerate(parse_double("model.phi.p", get("model.phi.p")));
        }
        if (kind == "atoms") {
            return PhiLaw::discrete_atoms(
                parse_double_list("model.phi.atoms", get("model.phi.atoms")),
                parse_double_list("model.phi.weights", get("model.phi.weights")));
        }
        if (kind == "beta") {
            return PhiLaw::beta(parse_double("model.phi.a", get("model.phi.a")),
                                parse_double("model.phi.b", get("model.phi.b")));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid phi law: ") + e.what());
    }
    throw ConfigError("config key 'model.phi.kind': unknown kind '" + kind +
                      "' (degenerate|atoms|beta)");
}

inline InnovationLaw build_innovation_law(const std::map<std::string, std::string>& kv) {
    const auto kind_it = kv.find("model.z.kind");
    if (kind_it == kv.end()) throw ConfigError("missing config key 'model.z.kind'");
    const std::string& kind = kind_it->second;
    auto get = [&kv](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing config key '" + key + "'");
        return it->second;
    };
    try {
        if (kind == "pareto") {
            return InnovationLaw::discrete_pareto(
                parse_double("model.z.alpha", get("model.z.alpha")),
                parse_double("model.z.sigma", get("model.z.sigma")));
        }
        if (kind == "poisson") {
            return InnovationLaw::poisson(parse_double("model.z.lambda", get("model.z.lambda")));
        }
        if (kind == "geometric") {
            return InnovationLaw::geometric(parse_double("model.z.q", get("model.z.q")));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid innovation law: ") + e.what());
    }
    throw ConfigError("config key 'model.z.kind': unknown kind '" + kind +
                      "' (pareto|poisson|geometric)");
}

inline SumsCase parse_sums_case(const std::string& value) {
    if (value == "subcritical") return SumsCase::SubCritical;
    if (value == "unit") return SumsCase::Unit;
    if (value == "midstable") return SumsCase::MidStable;
    if (value == "boundary") return SumsCase::Boundary;
    if (value == "gaussian") return SumsCase::Gaussian;
    throw ConfigError("config key 'case': unknown case '" + value +
                      "' (subcritical|unit|midstable|boundary|gaussian)");
}

}  // namespace detail

inline const std::set<std::string>& known_experiments() {
    static const std::set<std::string> names = {"simulate", "stationary", "tails",
                                                "extremes", "sums",       "regen",
                                                "genealogy", "ytail",     "lln",
                                                "verify"};
    return names;
}

// Parses and validates a configuration document. `experiment_override`, when
// non-empty, supplies or checks the experiment name (the CLI subcommand).
inline ExperimentConfig parse_config(std::string_view text,
                                     const std::string& experiment_override = {}) {
    ExperimentConfig cfg;
    std::map<std::string, std::string>& kv = cfg.raw;

    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t end = text.find('\n', begin);
        std::string_view line =
            text.substr(begin, end == std::string_view::npos ? std::string_view::npos
                                                             : end - begin);
        begin = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(trimmed).substr(0, eq));
        const std::string value = detail::trim(std::string_view(trimmed).substr(eq + 1));
        if (!detail::known_keys().count(key))
            throw ConfigError("unknown config key: '" + key + "'");
        if (kv.count(key)) throw ConfigError("duplicate config key: '" + key + "'");
        kv[key] = value;
    }

    if (!experiment_override.empty()) {
        if (kv.count("experiment") && kv["experiment"] != experiment_override)
            throw ConfigError("config names experiment '" + kv["experiment"] +
                              "' but '" + experiment_override + "' was requested");
        kv["experiment"] = experiment_override;
    }
    if (!kv.count("experiment")) throw ConfigError("missing config key 'experiment'");
    cfg.experiment = kv["experiment"];
    if (!known_experiments().count(cfg.experiment))
        throw ConfigError("unknown experiment: '" + cfg.experiment + "'");

    if (kv.count("model.phi.kind") || kv.count("model.z.kind")) {
        cfg.model = ModelSpec{detail::build_phi_law(kv), detail::build_innovation_law(kv)};
    }
    if (kv.count("n")) cfg.n = detail::parse_uint("n", kv["n"]);
    if (kv.count("n2")) cfg.n2 = detail::parse_uint("n2", kv["n2"]);
    if (kv.count("reps")) cfg.reps = detail::parse_uint("reps", kv["reps"]);
    if (kv.count("seed")) cfg.seed = detail::parse_uint("seed", kv["seed"]);
    if (kv.count("out_dir")) cfg.out_dir = kv["out_dir"];
    if (kv.count("epsilon")) cfg.epsilon = detail::parse_double("epsilon", kv["epsilon"]);
    if (kv.count("gamma")) cfg.gamma = detail::parse_double("gamma", kv["gamma"]);
    if (kv.count("burn_in")) cfg.burn_in = detail::parse_uint("burn_in", kv["burn_in"]);
    if (kv.count("workers"))
        cfg.workers = static_cast<unsigned>(detail::parse_uint("workers", kv["workers"]));
    if (kv.count("mode")) cfg.mode = kv["mode"];
    if (kv.count("phi_value"))
        cfg.phi_value = detail::parse_double("phi_value", kv["phi_value"]);
    if (kv.count("x0")) cfg.x0 = detail::parse_uint("x0", kv["x0"]);
    if (kv.count("sample_cap")) cfg.sample_cap = detail::parse_uint("sample_cap", kv["sample_cap"]);
    if (kv.count("case")) cfg.sums_case = detail::parse_sums_case(kv["case"]);

    // Per-experiment requirements.
    const std::string& e = cfg.experiment;
    auto require_model = [&] {
        if (!cfg.model) throw ConfigError("experiment '" + e + "' requires a model");
    };
    auto require_n = [&] {
        if (cfg.n < 1) throw ConfigError("experiment '" + e + "' requires n >= 1");
    };
    auto require_reps = [&] {
        if (cfg.reps < 1) throw ConfigError("experiment '" + e + "' requires reps >= 1");
    };
    if (e == "simulate" || e == "lln") {
        require_model();
        require_n();
    } else if (e == "stationary" || e == "tails" || e == "ytail" || e == "regen") {
        require_model();
        require_reps();
        if (e == "stationary" && cfg.mode != "series" && cfg.mode != "burnin" &&
            cfg.mode != "both")
            throw ConfigError("config key 'mode': expected series|burnin|both");
    } else if (e == "extremes" || e == "genealogy") {
        require_model();
        require_n();
        require_reps();
    } else if (e == "sums") {
        require_model();
        require_n();
        require_reps();
        if (!cfg.sums_case) throw ConfigError("experiment 'sums' requires a case");
        if (*cfg.sums_case != expected_sums_case(*cfg.model))
            throw ConfigError("case/model mismatch: model's innovation law implies case '" +
                              to_string(expected_sums_case(*cfg.model)) + "'");
    }
    if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 0.01))
        throw ConfigError("config key 'epsilon': must lie in (0, 0.01]");
    return cfg;
}

}  // namespace rcinar
