#pragma once

// Serialization helpers: deterministic number formatting, CSV emission for
// paths / cycles / raw samples, and JSON encoding of laws and results.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rcinar/engine.hpp"
#include "rcinar/genealogy.hpp"
#include "rcinar/stats.hpp"

namespace rcinar {

// Shortest round-trip decimal representation; byte-stable across runs.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// step,x,survivors,z,phi; row 0 carries the initial state.
inline std::string path_to_csv(const PathSample& path) {
    std::string out = "step,x,survivors,z,phi\n";
    for (std::size_t k = 0; k < path.x.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += std::to_string(path.x[k]);
        out += ',';
        out += std::to_string(path.survivors[k]);
        out += ',';
        out += std::to_string(path.z[k]);
        out += ',';
        out += fmt_double(path.phi[k]);
        out += '\n';
    }
    return out;
}

inline std::string cycles_to_csv(std::span<const CycleRecord> cycles) {
    std::string out = "cycle,sigma,w\n";
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += std::to_string(cycles[i].sigma);
        out += ',';
        out += std::to_string(cycles[i].w);
        out += '\n';
    }
    return out;
}

inline std::string sample_to_csv(std::span<const double> values, std::size_t cap,
                                 const std::string& column = "value") {
    std::string out = column + "\n";
    const std::size_t n = std::min(values.size(), cap);
    for (std::size_t i = 0; i < n; ++i) {
        out += fmt_double(values[i]);
        out += '\n';
    }
    return out;
}

inline nlohmann::json phi_law_to_json(const PhiLaw& law) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, DegeneratePhi>) {
                return {{"kind", "degenerate"}, {"p", v.p}};
            } else if constexpr (std::is_same_v<T, DiscreteAtomsPhi>) {
                return {{"kind", "atoms"}, {"atoms", v.atoms}, {"weights", v.weights}};
            } else {
                return {{"kind", "beta"}, {"a", v.a}, {"b", v.b}};
            }
        },
        law.variant());
}

inline nlohmann::json innovation_law_to_json(const InnovationLaw& law) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, DiscreteParetoZ>) {
                return {{"kind", "pareto"}, {"alpha", v.alpha}, {"sigma", v.sigma}};
            } else if constexpr (std::is_same_v<T, PoissonZ>) {
                return {{"kind", "poisson"}, {"lambda", v.lambda}};
            } else {
                return {{"kind", "geometric"}, {"q", v.q}};
            }
        },
        law.variant());
}

inline nlohmann::json model_to_json(const ModelSpec& model) {
    return {{"phi", phi_law_to_json(model.phi_law)},
            {"z", innovation_law_to_json(model.innovation_law)}};
}

inline nlohmann::json ks_to_json(const KsResult& ks) {
    return {{"statistic", ks.statistic}, {"threshold", ks.threshold}, {"pass", ks.pass}};
}

inline nlohmann::json tail_fit_to_json(const TailFit& fit) {
    return {{"alpha_hat", fit.alpha_hat}, {"c_hat", fit.c_hat},      {"k_used", fit.k_used},
            {"ci_low", fit.ci_low},       {"ci_high", fit.ci_high}};
}

}  // namespace rcinar
