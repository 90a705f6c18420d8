#pragma once

// The acceptance suite: fourteen pinned criteria covering thinning exactness,
// the stationary tail constant, thinned-tail scaling, extremes, regeneration,
// cycle tails, LLN, CLT, stable sums, the total-progeny tail constant,
// stationary-sampler cross-validation, genealogy consistency, and
// reproducibility. Each criterion reports one pass/fail verdict.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rcinar/runner.hpp"

namespace rcinar {

namespace detail {

inline std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return std::string(buf);
}

// Exact Binomial(x, phi) pmf by exhaustive enumeration of the 2^x Bernoulli
// outcome vectors; the oracle side of the thinning exactness criterion.
inline std::vector<double> enumerate_binomial_pmf(unsigned x, double phi) {
    std::vector<double> pmf(x + 1, 0.0);
    const std::uint64_t outcomes = std::uint64_t{1} << x;
    for (std::uint64_t mask = 0; mask < outcomes; ++mask) {
        const unsigned ones = static_cast<unsigned>(__builtin_popcountll(mask));
        pmf[ones] += std::pow(phi, ones) * std::pow(1.0 - phi, x - ones);
    }
    return pmf;
}

inline ModelSpec heavy_model(double alpha, double sigma = 1.0) {
    return ModelSpec{PhiLaw::beta(2.0, 2.0), InnovationLaw::discrete_pareto(alpha, sigma)};
}

inline ModelSpec light_model() {
    return ModelSpec{PhiLaw::degenerate(0.5), InnovationLaw::poisson(2.0)};
}

}  // namespace detail

inline std::vector<CriterionResult> run_acceptance(
    std::uint64_t seed, unsigned workers, const std::filesystem::path& out_dir,
    const std::function<void(const CriterionResult&)>& on_done) {
    using detail::fmt;
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<CriterionResult> results;

    auto stream = [seed](const char* tag) { return RngStream(seed, fnv1a(tag)); };
    auto add = [&](int id, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& fn) {
        CriterionResult r;
        r.id = id;
        r.name = name;
        try {
            const auto [pass, detail_text] = fn();
            r.pass = pass;
            r.detail = detail_text;
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
        }
        results.push_back(r);
        if (on_done) on_done(r);
    };

    // 1. Thinning exactness: TV(empirical, enumerated pmf) < 0.005 on the
    //    full x <= 12, phi in {0.1..0.9} grid, 1e6 draws per cell.
    add(1, "thinning exactness", [&]() -> std::pair<bool, std::string> {
        constexpr std::size_t kDraws = 1000000;
        const RngStream base = stream("acceptance/c1");
        struct Cell {
            unsigned x;
            double phi;
        };
        std::vector<Cell> cells;
        for (unsigned x = 0; x <= 12; ++x)
            for (int p = 1; p <= 9; ++p) cells.push_back({x, p / 10.0});
        std::vector<double> tv(cells.size(), 0.0);
        parallel_replicas(cells.size(), workers, [&](std::size_t c) {
            RngStream rng = base.substream(c);
            const auto pmf = detail::enumerate_binomial_pmf(cells[c].x, cells[c].phi);
            std::vector<std::uint64_t> counts(cells[c].x + 1, 0);
            for (std::size_t i = 0; i < kDraws; ++i)
                ++counts[thin(cells[c].x, cells[c].phi, rng)];
            double acc = 0.0;
            for (std::size_t j = 0; j < pmf.size(); ++j)
                acc += std::fabs(static_cast<double>(counts[j]) / kDraws - pmf[j]);
            tv[c] = acc / 2.0;
        });
        const double worst = *std::max_element(tv.begin(), tv.end());
        return {worst < 0.005, "max TV " + fmt(worst) + " (tol 0.005, 117 cells)"};
    });

    // 2. Stationary tail constant, Thm-main oracle.
    add(2, "stationary tail constant", [&]() -> std::pair<bool, std::string> {
        const auto res = stationary_tail_experiment(detail::heavy_model(1.5), 1000000,
                                                    stream("acceptance/c2"), workers);
        const ModelSpec base_case{PhiLaw::degenerate(0.0),
                                  InnovationLaw::discrete_pareto(1.5, 1.0)};
        const auto base_res = stationary_tail_experiment(base_case, 1000000,
                                                         stream("acceptance/c2base"), workers);
        const bool ok = res.rel_error <= 0.15 &&
                        base_res.fit.c_hat >= 0.9 && base_res.fit.c_hat <= 1.1;
        return {ok, "c_hat " + fmt(res.fit.c_hat) + " vs target " + fmt(res.target) +
                        " (rel err " + fmt(res.rel_error) + ", tol 0.15); base c_hat " +
                        fmt(base_res.fit.c_hat) + " in [0.9,1.1]"};
    });

    // 3. Thinned-tail scaling: h(t) P(phi o Z > t) -> phi^alpha.
    add(3, "thinned-tail scaling", [&]() -> std::pair<bool, std::string> {
        const auto res = thinning_tail_check(detail::heavy_model(1.5), 0.6, 10000000,
                                             stream("acceptance/c3"), workers);
        return {res.rel_error <= 0.10, "c_hat " + fmt(res.c_hat) + " vs 0.6^1.5 = " +
                                           fmt(res.target) + " (rel err " +
                                           fmt(res.rel_error) + ", tol 0.10)"};
    });

    // 4. Extremes: M_n/b_n against the exact K_n oracle, and the oracle
    //    against the Frechet limit at n = 1e5.
    add(4, "extremes", [&]() -> std::pair<bool, std::string> {
        const auto res = extremes_experiment(detail::heavy_model(1.5), 10000, 10000,
                                             stream("acceptance/c4"), workers);
        const double limit_dist = max_oracle_limit_distance(
            InnovationLaw::discrete_pareto(1.5, 1.0), 100000, 1.5);
        const bool ok = res.vs_oracle.statistic <= 0.03 && limit_dist <= 0.01;
        return {ok, "KS vs oracle " + fmt(res.vs_oracle.statistic) +
                        " (tol 0.03); oracle-vs-limit sup at n=1e5 " + fmt(limit_dist) +
                        " (tol 0.01)"};
    });

    // 5. Regeneration: i.i.d. cycles with geometric sigma tail.
    add(5, "regeneration structure", [&]() -> std::pair<bool, std::string> {
        RngStream rng = stream("acceptance/c5");
        const auto cycles = collect_cycles(detail::light_model(), 100000, rng);
        std::vector<std::uint64_t> sigma(cycles.size());
        for (std::size_t i = 0; i < cycles.size(); ++i) sigma[i] = cycles[i].sigma;
        const double corr = lag1_correlation(sigma);
        const auto fit = geometric_tail_fit(sigma);
        const bool ok = std::fabs(corr) <= 0.02 && !fit.degenerate && fit.slope < 0.0 &&
                        fit.r2 > 0.9;
        return {ok, "lag-1 corr " + fmt(corr) + " (tol 0.02); slope " + fmt(fit.slope) +
                        ", R^2 " + fmt(fit.r2) + " (need > 0.9)"};
    });

    // 6. Cycle-sum tail: Hill index of W_1 recovers alpha.
    add(6, "cycle-sum tail", [&]() -> std::pair<bool, std::string> {
        const auto res = cycle_tail_experiment(detail::heavy_model(1.5), 100000,
                                               stream("acceptance/c6"));
        const double a = res.w_fit.alpha_hat;
        return {a >= 1.35 && a <= 1.65,
                "W Hill index " + fmt(a) + " (window [1.35,1.65]); h-constant " +
                    fmt(res.w_tail_constant)};
    });

    // 7. LLN: S_n/n vs E[Z]/(1 - E[phi]).
    add(7, "law of large numbers", [&]() -> std::pair<bool, std::string> {
        const auto res = lln_check(detail::light_model(), 1000000, stream("acceptance/c7"));
        return {res.rel_error <= 0.02, "S_n/n " + fmt(res.s_over_n) + " vs target " +
                                           fmt(res.target) + " (rel err " +
                                           fmt(res.rel_error) + ", tol 0.02)"};
    });

    // 8. CLT at the t=1 marginal, studentized by the renewal variance oracle.
    add(8, "central limit theorem", [&]() -> std::pair<bool, std::string> {
        const auto res = partial_sums_experiment(detail::light_model(), SumsCase::Gaussian,
                                                 10000, 10000, stream("acceptance/c8"),
                                                 workers);
        const KsResult& ks = *res.normal_ks;
        return {ks.pass, "studentized KS vs N(0,1) " + fmt(ks.statistic) + " (threshold " +
                             fmt(ks.threshold) + ")"};
    });

    // 9. Stable sums, alpha < 1: support, tail index, self-consistency.
    add(9, "stable sums alpha<1", [&]() -> std::pair<bool, std::string> {
        const auto m = detail::heavy_model(0.7);
        const auto s1 = partial_sums_experiment(m, SumsCase::SubCritical, 1000, 10000,
                                                stream("acceptance/c9a"), workers);
        const auto s2 = partial_sums_experiment(m, SumsCase::SubCritical, 10000, 10000,
                                                stream("acceptance/c9b"), workers);
        const KsResult ks = ks_two_sample(Ecdf(s1.normalized), Ecdf(s2.normalized), 0.05);
        const double hill = s2.tail_fit ? s2.tail_fit->alpha_hat : 0.0;
        const bool ok = s1.all_nonnegative && s2.all_nonnegative && hill >= 0.6 &&
                        hill <= 0.8 && ks.pass;
        return {ok, std::string("nonneg ") + (s1.all_nonnegative && s2.all_nonnegative
                                                  ? "yes" : "NO") +
                        "; Hill " + fmt(hill) + " (window [0.6,0.8]); KS n=1e3 vs 1e4 " +
                        fmt(ks.statistic) + " (tol 0.05)"};
    });

    // 10. Centered stable sums, alpha in (1,2).
    add(10, "centered stable sums", [&]() -> std::pair<bool, std::string> {
        const auto m = detail::heavy_model(1.5);
        const auto s1 = partial_sums_experiment(m, SumsCase::MidStable, 1000, 10000,
                                                stream("acceptance/c10a"), workers);
        const auto s2 = partial_sums_experiment(m, SumsCase::MidStable, 4000, 10000,
                                                stream("acceptance/c10b"), workers);
        const KsResult ks = ks_two_sample(Ecdf(s1.normalized), Ecdf(s2.normalized), 0.05);
        const double hill = s2.tail_fit ? s2.tail_fit->alpha_hat : 0.0;
        const bool ok = ks.pass && hill >= 1.3 && hill <= 1.7;
        return {ok, "KS n=1e3 vs 4e3 " + fmt(ks.statistic) + " (tol 0.05); positive-tail Hill " +
                        fmt(hill) + " (window [1.3,1.7])"};
    });

    // 11. Total-progeny tail constant (Y_1).
    add(11, "total-progeny tail constant", [&]() -> std::pair<bool, std::string> {
        const auto res = y_tail_constant_experiment(detail::heavy_model(0.7), 1000000,
                                                    stream("acceptance/c11"), workers);
        const ModelSpec det{PhiLaw::degenerate(0.5), InnovationLaw::discrete_pareto(0.7, 1.0)};
        const auto det_res = y_tail_constant_experiment(det, 1000000,
                                                        stream("acceptance/c11det"), workers);
        const double det_target = std::pow(2.0, 0.7);
        const double det_err = std::fabs(det_res.c_hat / det_target - 1.0);
        const bool ok = res.rel_error <= 0.2 && det_err <= 0.1;
        return {ok, "c_hat " + fmt(res.c_hat) + " vs target " + fmt(res.target) +
                        " (rel err " + fmt(res.rel_error) + ", tol 0.2); deterministic case " +
                        fmt(det_res.c_hat) + " vs 2^0.7 = " + fmt(det_target) + " (rel err " +
                        fmt(det_err) + ", tol 0.1)"};
    });

    // 12. Stationary sampler cross-validation: series vs burn-in.
    add(12, "stationary sampler cross-validation", [&]() -> std::pair<bool, std::string> {
        const auto model = detail::light_model();
        constexpr std::size_t kDraws = 100000;
        StationaryConfig series_cfg;
        series_cfg.epsilon = 1e-6;
        const StationarySampler series(model, series_cfg);
        StationaryConfig burn_cfg;
        burn_cfg.mode = StationaryConfig::Mode::BurnIn;
        burn_cfg.burn_in_steps = 100000;
        const StationarySampler burn(model, burn_cfg);
        std::vector<double> a(kDraws), b(kDraws);
        const RngStream sa = stream("acceptance/c12a");
        const RngStream sb = stream("acceptance/c12b");
        parallel_replicas(kDraws, workers, [&](std::size_t i) {
            RngStream rng = sa.substream(i);
            a[i] = static_cast<double>(series.draw(rng));
        });
        parallel_replicas(kDraws, workers, [&](std::size_t i) {
            RngStream rng = sb.substream(i);
            b[i] = static_cast<double>(burn.draw(rng));
        });
        const KsResult ks = ks_two_sample(Ecdf(a), Ecdf(b), 0.01);
        return {ks.pass, "KS series vs burn-in " + fmt(ks.statistic) + " (tol 0.01)"};
    });

    // 13. Genealogy consistency: ledger/path law, exact coalescence mass,
    //     age-law stabilization.
    add(13, "genealogy consistency", [&]() -> std::pair<bool, std::string> {
        const ModelSpec model{PhiLaw::beta(2.0, 2.0), InnovationLaw::poisson(2.0)};
        // (a) ledger total vs plain path, horizon 100, 1e5 replicas each.
        constexpr std::size_t kReps = 100000;
        constexpr std::uint64_t kHorizon = 100;
        std::vector<double> ledger_x(kReps), plain_x(kReps);
        const RngStream la = stream("acceptance/c13ledger");
        const RngStream lb = stream("acceptance/c13plain");
        parallel_replicas(kReps, workers, [&](std::size_t r) {
            RngStream rng = la.substream(r);
            CohortLedger ledger;
            for (std::uint64_t k = 0; k < kHorizon; ++k) {
                const double phi = model.phi_law.sample(rng);
                const std::uint64_t z = model.innovation_law.sample(rng);
                ledger.step(phi, z, rng);
            }
            ledger_x[r] = static_cast<double>(ledger.total());
        });
        parallel_replicas(kReps, workers, [&](std::size_t r) {
            RngStream rng = lb.substream(r);
            plain_x[r] = static_cast<double>(path_final_value(model, kHorizon, 0, rng));
        });
        const KsResult ks = ks_two_sample(Ecdf(ledger_x), Ecdf(plain_x), 0.01);

        // (b) coalescence law sums to one exactly.
        double worst_mass_gap = 0.0;
        {
            RngStream rng = stream("acceptance/c13coal");
            for (int rep = 0; rep < 200; ++rep) {
                CohortLedger ledger;
                for (std::uint64_t k = 0; k < 200; ++k) {
                    const double phi = model.phi_law.sample(rng);
                    const std::uint64_t z = model.innovation_law.sample(rng);
                    ledger.step(phi, z, rng);
                }
                if (const auto law = coalescence_law(ledger)) {
                    double total = law->p_infinity;
                    for (const auto& [age, p] : law->pmf) total += p;
                    worst_mass_gap = std::max(worst_mass_gap, std::fabs(total - 1.0));
                }
            }
        }

        // (c) age laws stabilize between horizons 1e3 and 2e3.
        constexpr std::size_t kAgeReps = 10000;
        auto age_run = [&](std::uint64_t horizon, const RngStream& base,
                           std::vector<double>& lambdas, std::vector<double>& etas) {
            std::vector<double> lam(kAgeReps, -1.0), eta(kAgeReps, -1.0);
            parallel_replicas(kAgeReps, workers, [&](std::size_t r) {
                RngStream rng = base.substream(r);
                CohortLedger ledger;
                for (std::uint64_t k = 0; k < horizon; ++k) {
                    const double phi = model.phi_law.sample(rng);
                    const std::uint64_t z = model.innovation_law.sample(rng);
                    ledger.step(phi, z, rng);
                }
                if (const auto l = max_age(ledger)) lam[r] = static_cast<double>(*l);
                if (const auto a = avg_age(ledger)) eta[r] = *a;
            });
            for (std::size_t r = 0; r < kAgeReps; ++r) {
                if (lam[r] >= 0.0) lambdas.push_back(lam[r]);
                if (eta[r] >= 0.0) etas.push_back(eta[r]);
            }
        };
        std::vector<double> lam1, lam2, eta1, eta2;
        age_run(1000, stream("acceptance/c13age1"), lam1, eta1);
        age_run(2000, stream("acceptance/c13age2"), lam2, eta2);
        const KsResult lam_ks = ks_two_sample(Ecdf(lam1), Ecdf(lam2), 0.05);
        const double m1 = stable_mean(eta1);
        const double m2 = stable_mean(eta2);
        const double joint_se =
            std::sqrt(sample_variance(eta1) / static_cast<double>(eta1.size()) +
                      sample_variance(eta2) / static_cast<double>(eta2.size()));
        const bool eta_ok = std::fabs(m1 - m2) <= 3.0 * joint_se;

        const bool ok = ks.pass && worst_mass_gap <= 1e-12 && lam_ks.pass && eta_ok;
        return {ok, "ledger-vs-path KS " + fmt(ks.statistic) + " (tol 0.01); coalescence mass gap " +
                        fmt(worst_mass_gap, 3) + " (tol 1e-12); lambda KS " +
                        fmt(lam_ks.statistic) + " (tol 0.05); |eta drift| " +
                        fmt(std::fabs(m1 - m2)) + " vs 3*SE " + fmt(3.0 * joint_se)};
    });

    // 14. Reproducibility: worker count cannot change a byte; manifests replay.
    add(14, "reproducibility", [&]() -> std::pair<bool, std::string> {
        const fs::path dir_a = out_dir / "repro_w1";
        const fs::path dir_b = out_dir / "repro_w8";
        const fs::path dir_c = out_dir / "repro_replay";
        auto config_text = [&](const fs::path& dir, unsigned w) {
            return std::string("experiment = stationary\n") +
                   "model.phi.kind = degenerate\nmodel.phi.p = 0.5\n" +
                   "model.z.kind = poisson\nmodel.z.lambda = 2\n" +
                   "reps = 20000\nseed = " + std::to_string(seed) + "\n" +
                   "workers = " + std::to_string(w) + "\n" +
                   "out_dir = " + dir.string() + "\n";
        };
        const auto run_a = run(parse_config(config_text(dir_a, 1)));
        const auto run_b = run(parse_config(config_text(dir_b, 8)));
        const bool summaries_equal = read_text_file(run_a.summary_path) ==
                                     read_text_file(run_b.summary_path);
        const bool csv_equal =
            read_text_file(dir_a / "stationary_sample.csv") ==
            read_text_file(dir_b / "stationary_sample.csv");
        const auto run_c = replay(run_b.manifest_path, dir_c.string());
        const bool replay_equal = read_text_file(run_c.summary_path) ==
                                      read_text_file(run_b.summary_path) &&
                                  read_text_file(dir_c / "stationary_sample.csv") ==
                                      read_text_file(dir_b / "stationary_sample.csv");
        const bool ok = summaries_equal && csv_equal && replay_equal;
        return {ok, std::string("1-vs-8 workers byte-identical: ") +
                        (summaries_equal && csv_equal ? "yes" : "NO") +
                        "; manifest replay byte-identical: " + (replay_equal ? "yes" : "NO")};
    });

    return results;
}

}  // namespace rcinar
