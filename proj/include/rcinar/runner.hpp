#pragma once

// Experiment dispatch: runs a validated configuration, writes the JSON
// summary, the raw-sample CSV, and a manifest sufficient to regenerate every
// numerical artifact byte for byte.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcinar/config.hpp"
#include "rcinar/io.hpp"
#include "rcinar/limitlab.hpp"
#include "rcinar/version.hpp"

namespace rcinar {

// Exit conventions: 0 = pass, 2 = statistical check failed, 1 = execution
// error (thrown; the CLI maps exceptions to 1).
struct RunArtifacts {
    int exit_code = 0;
    nlohmann::json summary;
    std::filesystem::path summary_path;
    std::filesystem::path manifest_path;
};

namespace detail {

inline std::string config_hash_hex(const ExperimentConfig& cfg) {
    const std::uint64_t h = fnv1a(cfg.canonical_text());
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc;
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

inline nlohmann::json make_manifest(const ExperimentConfig& cfg, std::size_t replica_count,
                                    const std::string& started, const std::string& finished) {
    nlohmann::json manifest;
    manifest["schema"] = 1;
    manifest["tool_version"] = kVersion;
    manifest["experiment"] = cfg.experiment;
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = config_hash_hex(cfg);
    manifest["config"] = cfg.raw;
    manifest["stream_rule"] = "substream(replica) of RngStream(seed, fnv1a(experiment))";
    const RngStream base(cfg.seed, fnv1a(cfg.experiment));
    nlohmann::json ids = nlohmann::json::array();
    const std::size_t listed = std::min<std::size_t>(replica_count, 10000);
    for (std::size_t r = 0; r < listed; ++r) ids.push_back(base.substream(r).stream_id());
    manifest["replica_count"] = replica_count;
    manifest["stream_ids"] = std::move(ids);
    manifest["started"] = started;
    manifest["finished"] = finished;
    return manifest;
}

struct SummaryBuilder {
    nlohmann::json j;

    explicit SummaryBuilder(const ExperimentConfig& cfg) {
        j["schema"] = 1;
        j["experiment"] = cfg.experiment;
        if (cfg.model) j["model"] = model_to_json(*cfg.model);
        j["n"] = cfg.n;
        j["reps"] = cfg.reps;
        j["seed"] = cfg.seed;
        j["estimates"] = nlohmann::json::object();
        j["targets"] = nlohmann::json::object();
        j["ks"] = nlohmann::json::object();
        j["pass"] = true;
    }
};

}  // namespace detail

// Forward declaration; defined in acceptance.hpp and used by `verify`.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, unsigned workers,
                                            const std::filesystem::path& out_dir,
                                            const std::function<void(const CriterionResult&)>&
                                                on_done = {});

inline RunArtifacts run(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    const std::string started = detail::iso_timestamp();

    const RngStream base(cfg.seed, fnv1a(cfg.experiment));
    detail::SummaryBuilder sb(cfg);
    nlohmann::json& j = sb.j;
    std::string raw_csv;
    std::string raw_csv_name = cfg.experiment + "_sample.csv";
    std::size_t replica_count = cfg.reps;
    bool pass = true;

    const std::string& e = cfg.experiment;
    if (e == "simulate") {
        RngStream rng = base.substream(0);
        const PathSample path = simulate_path(*cfg.model, cfg.n, cfg.x0, rng);
        raw_csv = path_to_csv(path);
        raw_csv_name = "simulate_path.csv";
        replica_count = 1;
        double mean = 0.0;
        for (std::size_t k = 1; k < path.x.size(); ++k) mean += static_cast<double>(path.x[k]);
        j["estimates"]["path_mean"] = mean / static_cast<double>(cfg.n);
        j["estimates"]["final_x"] = path.x.back();
    } else if (e == "stationary") {
        std::vector<double> series_sample, burnin_sample;
        if (cfg.mode == "series" || cfg.mode == "both") {
            const StationarySampler sampler(
                *cfg.model, cfg.stationary_config(StationaryConfig::Mode::TruncatedSeries));
            series_sample.resize(cfg.reps);
            parallel_replicas(cfg.reps, cfg.workers, [&](std::size_t i) {
                RngStream rng = base.substream(i);
                series_sample[i] = static_cast<double>(sampler.draw(rng));
            });
        }
        if (cfg.mode == "burnin" || cfg.mode == "both") {
            const StationarySampler sampler(
                *cfg.model, cfg.stationary_config(StationaryConfig::Mode::BurnIn));
            const RngStream bbase = base.substream(fnv1a("burnin"));
            burnin_sample.resize(cfg.reps);
            parallel_replicas(cfg.reps, cfg.workers, [&](std::size_t i) {
                RngStream rng = bbase.substream(i);
                burnin_sample[i] = static_cast<double>(sampler.draw(rng));
            });
        }
        const std::vector<double>& main_sample =
            cfg.mode == "burnin" ? burnin_sample : series_sample;
        j["estimates"]["mean"] = stable_mean(main_sample);
        if (cfg.mode == "both") {
            const KsResult ks = ks_two_sample(Ecdf(series_sample), Ecdf(burnin_sample), 0.01);
            j["ks"]["series_vs_burnin"] = ks_to_json(ks);
            pass = ks.pass;
        }
        raw_csv = sample_to_csv(main_sample, cfg.sample_cap);
    } else if (e == "tails") {
        const auto res = stationary_tail_experiment(
            *cfg.model, cfg.reps, base, cfg.workers,
            cfg.stationary_config(StationaryConfig::Mode::TruncatedSeries));
        j["estimates"]["tail_fit"] = tail_fit_to_json(res.fit);
        j["estimates"]["c_at_half_k"] = res.c_at_half_k;
        j["estimates"]["c_at_double_k"] = res.c_at_double_k;
        j["estimates"]["rel_error"] = res.rel_error;
        j["targets"]["c"] = res.target;
        pass = res.rel_error <= 0.15;
        if (cfg.phi_value) {
            const auto thin_res = thinning_tail_check(*cfg.model, *cfg.phi_value, cfg.reps,
                                                      base.substream(fnv1a("thinning")),
                                                      cfg.workers);
            j["estimates"]["thinning_c_hat"] = thin_res.c_hat;
            j["estimates"]["thinning_rel_error"] = thin_res.rel_error;
            j["targets"]["thinning_c"] = thin_res.target;
            pass = pass && thin_res.rel_error <= 0.10;
        }
        raw_csv.clear();
    } else if (e == "extremes") {
        const auto res = extremes_experiment(*cfg.model, cfg.n, cfg.reps, base, cfg.workers);
        j["estimates"]["b_n"] = res.b_n;
        j["ks"]["vs_oracle"] = ks_to_json(res.vs_oracle);
        j["ks"]["vs_frechet"] = ks_to_json(res.vs_frechet);
        j["estimates"]["oracle_frechet_dist"] = res.oracle_frechet_dist;
        j["estimates"]["oracle_frechet_inv_dist"] = res.oracle_frechet_inv_dist;
        pass = res.vs_oracle.statistic <= 0.03;
        raw_csv = sample_to_csv(res.normalized, cfg.sample_cap);
    } else if (e == "sums") {
        const SumsOptions opts{1000000, 200000,
                               cfg.stationary_config(StationaryConfig::Mode::TruncatedSeries)};
        const auto res = partial_sums_experiment(*cfg.model, *cfg.sums_case, cfg.n, cfg.reps,
                                                 base, cfg.workers, opts);
        j["estimates"]["a_n"] = res.a_n;
        j["estimates"]["centering"] = res.centering;
        j["estimates"]["mu_hat"] = res.mu_hat;
        j["estimates"]["all_nonnegative"] = res.all_nonnegative;
        if (res.tail_fit) j["estimates"]["tail_fit"] = tail_fit_to_json(*res.tail_fit);
        if (res.normal_ks) {
            j["ks"]["vs_normal"] = ks_to_json(*res.normal_ks);
            pass = res.normal_ks->pass;
        }
        if (*cfg.sums_case == SumsCase::SubCritical) pass = pass && res.all_nonnegative;
        if (cfg.n2 > 0) {
            const auto res2 = partial_sums_experiment(*cfg.model, *cfg.sums_case, cfg.n2,
                                                      cfg.reps, base.substream(fnv1a("n2")),
                                                      cfg.workers, opts);
            const KsResult ks =
                ks_two_sample(Ecdf(res.normalized), Ecdf(res2.normalized), 0.05);
            j["ks"]["self_consistency"] = ks_to_json(ks);
            pass = pass && ks.pass;
        }
        raw_csv = sample_to_csv(res.normalized, cfg.sample_cap);
    } else if (e == "regen") {
        RngStream rng = base.substream(0);
        const auto cycles = collect_cycles(*cfg.model, cfg.reps, rng);
        std::vector<std::uint64_t> sigma(cycles.size());
        for (std::size_t i = 0; i < cycles.size(); ++i) sigma[i] = cycles[i].sigma;
        const double corr = lag1_correlation(sigma);
        const GeomTailFit fit = geometric_tail_fit(sigma);
        j["estimates"]["sigma_lag1_corr"] = corr;
        j["estimates"]["sigma_fit"] = {{"slope", fit.slope},
                                       {"intercept", fit.intercept},
                                       {"r2", fit.r2},
                                       {"points", fit.points},
                                       {"degenerate", fit.degenerate}};
        pass = std::fabs(corr) <= 0.02 &&
               (fit.degenerate || (fit.slope < 0.0 && fit.r2 > 0.9));
        raw_csv = cycles_to_csv(cycles);
        raw_csv_name = "regen_cycles.csv";
        replica_count = 1;
    } else if (e == "genealogy") {
        // Replica-resolved age and coalescence summaries at horizon n.
        const std::size_t reps = cfg.reps;
        std::vector<double> lambdas, etas;
        std::vector<double> p_inf(reps, -1.0);
        std::vector<double> lam(reps, -1.0), eta_v(reps, -1.0);
        parallel_replicas(reps, cfg.workers, [&](std::size_t r) {
            RngStream rng = base.substream(r);
            CohortLedger ledger;
            for (std::uint64_t k = 0; k < cfg.n; ++k) {
                const double phi = cfg.model->phi_law.sample(rng);
                const std::uint64_t z = cfg.model->innovation_law.sample(rng);
                ledger.step(phi, z, rng);
            }
            if (const auto l = max_age(ledger)) lam[r] = static_cast<double>(*l);
            if (const auto a = avg_age(ledger)) eta_v[r] = *a;
            if (const auto law = coalescence_law(ledger)) p_inf[r] = law->p_infinity;
        });
        for (std::size_t r = 0; r < reps; ++r) {
            if (lam[r] >= 0.0) lambdas.push_back(lam[r]);
            if (eta_v[r] >= 0.0) etas.push_back(eta_v[r]);
        }
        j["estimates"]["lambda_mean"] = lambdas.empty() ? 0.0 : stable_mean(lambdas);
        j["estimates"]["eta_mean"] = etas.empty() ? 0.0 : stable_mean(etas);
        j["estimates"]["lambda_defined_fraction"] =
            static_cast<double>(lambdas.size()) / static_cast<double>(reps);
        raw_csv = sample_to_csv(lambdas, cfg.sample_cap, "lambda");
        raw_csv_name = "genealogy_lambda.csv";
    } else if (e == "ytail") {
        const auto res = y_tail_constant_experiment(*cfg.model, cfg.reps, base, cfg.workers);
        j["estimates"]["c_hat"] = res.c_hat;
        j["estimates"]["rel_error"] = res.rel_error;
        j["estimates"]["tail_fit"] = tail_fit_to_json(res.fit);
        j["targets"]["c"] = res.target;
        pass = res.rel_error <= 0.2;
        raw_csv.clear();
    } else if (e == "lln") {
        const auto res = lln_check(*cfg.model, cfg.n, base);
        j["estimates"]["s_over_n"] = res.s_over_n;
        j["estimates"]["rel_error"] = res.rel_error;
        j["targets"]["mean"] = res.target;
        pass = res.rel_error <= 0.02;
        replica_count = 1;
        raw_csv.clear();
    } else if (e == "verify") {
        nlohmann::json criteria = nlohmann::json::array();
        const auto results = run_acceptance(cfg.seed, cfg.workers, out_dir);
        for (const auto& r : results) {
            criteria.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass},
                                {"detail", r.detail}});
            pass = pass && r.pass;
        }
        j["estimates"]["criteria"] = std::move(criteria);
        replica_count = 0;
        raw_csv.clear();
    } else {
        throw ConfigError("unknown experiment: '" + e + "'");
    }

    j["pass"] = pass;

    RunArtifacts artifacts;
    artifacts.exit_code = pass ? 0 : 2;
    artifacts.summary = j;
    artifacts.summary_path = out_dir / (e + "_summary.json");
    write_text_file(artifacts.summary_path, j.dump(2) + "\n");
    if (!raw_csv.empty()) write_text_file(out_dir / raw_csv_name, raw_csv);

    const std::string finished = detail::iso_timestamp();
    const nlohmann::json manifest = detail::make_manifest(cfg, replica_count, started, finished);
    artifacts.manifest_path = out_dir / (e + "_manifest.json");
    write_text_file(artifacts.manifest_path, manifest.dump(2) + "\n");
    return artifacts;
}

// Re-runs an experiment from its manifest; numerical outputs are regenerated
// byte-identically (timestamps live only in the manifest itself).
inline RunArtifacts replay(const std::filesystem::path& manifest_path,
                           const std::string& out_dir_override = {}) {
    const nlohmann::json manifest = nlohmann::json::parse(read_text_file(manifest_path));
    std::string text;
    for (const auto& [k, v] : manifest.at("config").items()) {
        text += k + " = " + v.get<std::string>() + "\n";
    }
    ExperimentConfig cfg = parse_config(text);
    if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
    return run(cfg);
}

}  // namespace rcinar

#include "rcinar/acceptance.hpp"  // supplies run_acceptance for `verify`
