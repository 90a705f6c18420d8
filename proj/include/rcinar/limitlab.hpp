#pragma once

// Quantitative experiments for the limit theorems: stationary tail constant,
// thinned-tail scaling, extremes against the exact finite-n maxima oracle,
// normalized partial sums in all five regimes, cycle-sum tails, total-progeny
// tail constant, and the law of large numbers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcinar/distributions.hpp"
#include "rcinar/engine.hpp"
#include "rcinar/genealogy.hpp"
#include "rcinar/parallel.hpp"
#include "rcinar/rng.hpp"
#include "rcinar/stats.hpp"

namespace rcinar {

// --------------------------------------------------------------------------
// stationary tail constant
// --------------------------------------------------------------------------

struct TailConstantResult {
    TailFit fit;
    double target = 0.0;
    double rel_error = 0.0;
    double c_at_half_k = 0.0;  // k-sensitivity readouts
    double c_at_double_k = 0.0;
    std::size_t draws = 0;
};

// Draws stationary samples and compares h(t) * P(X > t) at the upper
// quantiles against (1 - E[phi^alpha])^{-1}.
inline TailConstantResult stationary_tail_experiment(const ModelSpec& model, std::size_t draws,
                                                     const RngStream& base, unsigned workers = 0,
                                                     const StationaryConfig& cfg = {}) {
    if (!model.innovation_law.heavy_tailed())
        throw std::invalid_argument("stationary tail experiment needs the heavy-tailed law");
    const double alpha = model.innovation_law.tail_index();
    const StationarySampler sampler(model, cfg);
    std::vector<double> sample(draws);
    parallel_replicas(draws, workers, [&](std::size_t i) {
        RngStream rng = base.substream(i);
        sample[i] = static_cast<double>(sampler.draw(rng));
    });

    const InnovationLaw& law = model.innovation_law;
    auto h = [&law](double t) { return law.h(t); };
    TailConstantResult out;
    out.draws = draws;
    const std::size_t k = hill_default_k(draws);
    out.fit = hill_estimate(sample, k, h);
    {
        std::vector<double> sorted = sample;
        std::sort(sorted.begin(), sorted.end());
        out.c_at_half_k = detail::tail_constant(sorted, h, std::max<std::size_t>(10, k / 2));
        out.c_at_double_k = detail::tail_constant(sorted, h, std::min(2 * k, draws / 2 - 1));
    }
    out.target = 1.0 / (1.0 - model.phi_law.moment(alpha));
    out.rel_error = std::fabs(out.fit.c_hat / out.target - 1.0);
    return out;
}

// --------------------------------------------------------------------------
// thinned-tail scaling: h(t) * P(phi o Z > t) -> phi^alpha
// --------------------------------------------------------------------------

struct ThinningTailResult {
    double c_hat = 0.0;
    double target = 0.0;
    double rel_error = 0.0;
    std::size_t draws = 0;
};

inline ThinningTailResult thinning_tail_check(const ModelSpec& model, double phi_value,
                                              std::size_t draws, const RngStream& base,
                                              unsigned workers = 0) {
    if (!model.innovation_law.heavy_tailed())
        throw std::invalid_argument("thinning tail check needs the heavy-tailed law");
    if (!(phi_value >= 0.0 && phi_value <= 1.0))
        throw std::invalid_argument("thinning tail check: phi outside [0,1]");
    const double alpha = model.innovation_law.tail_index();
    std::vector<double> sample(draws);
    parallel_replicas(draws, workers, [&](std::size_t i) {
        RngStream rng = base.substream(i);
        const std::uint64_t z = model.innovation_law.sample(rng);
        sample[i] = static_cast<double>(thin(z, phi_value, rng));
    });
    std::sort(sample.begin(), sample.end());

    ThinningTailResult out;
    out.draws = draws;
    out.target = phi_value == 0.0 ? 0.0 : std::pow(phi_value, alpha);
    const InnovationLaw& law = model.innovation_law;
    if (sample.back() <= 0.0) {
        out.c_hat = 0.0;  // fully thinned; survival vanishes above 0
        out.rel_error = out.target == 0.0 ? 0.0 : 1.0;
        return out;
    }
    out.c_hat = detail::tail_constant(sample, [&law](double t) { return law.h(t); },
                                      hill_default_k(draws));
    out.rel_error = std::fabs(out.c_hat / out.target - 1.0);
    return out;
}

// --------------------------------------------------------------------------
// extremes
// --------------------------------------------------------------------------

// Sup distance between the exact law of K_n / b_n and a Frechet-type CDF
// exp(-x^{-index}), computed over the lattice of jump points.
inline double max_oracle_limit_distance(const InnovationLaw& law, std::uint64_t n,
                                        double index) {
    const double bn = law.b_n(n);
    double d = 0.0;
    const double nd = static_cast<double>(n);
    for (std::uint64_t m = 0;; ++m) {
        const double md = static_cast<double>(m);
        const double s = law.survival(md);
        const double oracle = s >= 1.0 ? 0.0 : std::exp(nd * std::log1p(-s));
        auto frechet = [index](double x) {
            return x <= 0.0 ? 0.0 : std::exp(-std::pow(x, -index));
        };
        // oracle CDF is constant on [m/bn, (m+1)/bn)
        d = std::max({d, std::fabs(oracle - frechet(md / bn)),
                      std::fabs(oracle - frechet((md + 1.0) / bn))});
        if (oracle > 1.0 - 1e-9 && frechet(md / bn) > 1.0 - 1e-9) break;
        if (m > 200000000) break;  // lattice guard
    }
    return d;
}

struct ExtremesResult {
    std::uint64_t n = 0;
    std::size_t reps = 0;
    double b_n = 0.0;
    std::vector<double> normalized;  // M_n / b_n per replica
    KsResult vs_oracle;              // one-sample KS against the exact K_n law
    KsResult vs_frechet;             // against the limit CDF exp(-x^{-alpha})
    double oracle_frechet_dist = 0.0;      // exact K_n law vs exp(-x^{-alpha})
    double oracle_frechet_inv_dist = 0.0;  // vs the 1/alpha index convention
};

inline ExtremesResult extremes_experiment(const ModelSpec& model, std::uint64_t n,
                                          std::size_t reps, const RngStream& base,
                                          unsigned workers = 0) {
    if (!model.innovation_law.heavy_tailed())
        throw std::invalid_argument("extremes experiment needs the heavy-tailed law");
    const InnovationLaw& law = model.innovation_law;
    const double alpha = law.tail_index();
    const double bn = law.b_n(n);

    std::vector<double> maxima(reps);
    parallel_replicas(reps, workers, [&](std::size_t r) {
        RngStream rng = base.substream(r);
        std::uint64_t x = 0;
        std::uint64_t running_max = 0;
        for (std::uint64_t k = 0; k < n; ++k) {
            const double phi = model.phi_law.sample(rng);
            const std::uint64_t survivors = thin(x, phi, rng);
            x = survivors + law.sample(rng);
            running_max = std::max(running_max, x);
        }
        maxima[r] = static_cast<double>(running_max);
    });

    ExtremesResult out;
    out.n = n;
    out.reps = reps;
    out.b_n = bn;
    out.normalized.resize(reps);
    for (std::size_t r = 0; r < reps; ++r) out.normalized[r] = maxima[r] / bn;

    const Ecdf ecdf(out.normalized);
    const double nd = static_cast<double>(n);
    auto oracle_cdf = [&law, nd, bn](double x) {
        const double s = law.survival(x * bn);
        return s >= 1.0 ? 0.0 : std::exp(nd * std::log1p(-s));
    };
    auto oracle_cdf_left = [&law, nd, bn](double x) {
        // jump points sit on the integer lattice of x * bn
        const double m = std::floor(x * bn);
        const double s = law.survival(m - 1.0);
        return s >= 1.0 ? 0.0 : std::exp(nd * std::log1p(-s));
    };
    out.vs_oracle = ks_one_sample(ecdf, oracle_cdf, oracle_cdf_left);
    auto frechet = [alpha](double x) {
        return x <= 0.0 ? 0.0 : std::exp(-std::pow(x, -alpha));
    };
    out.vs_frechet = ks_one_sample(ecdf, frechet);
    out.oracle_frechet_dist = max_oracle_limit_distance(law, n, alpha);
    out.oracle_frechet_inv_dist = max_oracle_limit_distance(law, n, 1.0 / alpha);
    return out;
}

// --------------------------------------------------------------------------
// partial sums
// --------------------------------------------------------------------------

enum class SumsCase { SubCritical, Unit, MidStable, Boundary, Gaussian };

inline std::string to_string(SumsCase c) {
    switch (c) {
        case SumsCase::SubCritical: return "subcritical";
        case SumsCase::Unit: return "unit";
        case SumsCase::MidStable: return "midstable";
        case SumsCase::Boundary: return "boundary";
        case SumsCase::Gaussian: return "gaussian";
    }
    return "?";
}

// The regime the model's innovation law actually lives in.
inline SumsCase expected_sums_case(const ModelSpec& model) {
    if (!model.innovation_law.heavy_tailed()) return SumsCase::Gaussian;
    const double a = model.innovation_law.tail_index();
    if (a < 1.0) return SumsCase::SubCritical;
    if (a == 1.0) return SumsCase::Unit;
    if (a < 2.0) return SumsCase::MidStable;
    if (a == 2.0) return SumsCase::Boundary;
    return SumsCase::Gaussian;
}

struct SumsOptions {
    std::size_t pre_sample_size = 1000000;   // truncated-moment pre-sample
    std::size_t variance_cycles = 200000;    // Gaussian-case renewal variance
    StationaryConfig stationary;             // initial-state sampler settings
};

struct SumsResult {
    SumsCase kase = SumsCase::Gaussian;
    std::uint64_t n = 0;
    std::size_t reps = 0;
    double a_n = 0.0;        // normalizing denominator
    double centering = 0.0;  // subtracted before dividing (already times n)
    double mu_hat = 0.0;     // stationary mean estimate where used
    std::vector<double> normalized;
    bool all_nonnegative = false;
    std::optional<TailFit> tail_fit;    // stable cases: Hill on the positive part
    std::optional<KsResult> normal_ks;  // Gaussian case
};

namespace detail {

inline std::vector<double> stationary_presample(const ModelSpec& model,
                                                const StationaryConfig& cfg, std::size_t size,
                                                const RngStream& base, unsigned workers) {
    const StationarySampler sampler(model, cfg);
    std::vector<double> pre(size);
    parallel_replicas(size, workers, [&](std::size_t i) {
        RngStream rng = base.substream(i);
        pre[i] = static_cast<double>(sampler.draw(rng));
    });
    std::sort(pre.begin(), pre.end());
    return pre;
}

// E[X ; X <= t] from a sorted pre-sample.
inline double truncated_mean(const std::vector<double>& sorted, double t) {
    double acc = 0.0;
    for (double v : sorted) {
        if (v > t) break;
        acc += v;
    }
    return acc / static_cast<double>(sorted.size());
}

// Smallest order statistic t with n * t^{-2} * E[X^2 ; X <= t] <= 1. The
// defining function is not monotone pointwise, hence the full scan.
inline double boundary_a_n(const std::vector<double>& sorted, std::uint64_t n) {
    const double nd = static_cast<double>(n);
    double acc2 = 0.0;
    for (double v : sorted) {
        acc2 += v * v;
        if (v <= 0.0) continue;
        const double crit = nd * (acc2 / static_cast<double>(sorted.size())) / (v * v);
        if (crit <= 1.0) return v;
    }
    throw std::runtime_error(
        "boundary a_n: no order statistic satisfies the truncated second-moment bound; "
        "enlarge the pre-sample");
}

}  // namespace detail

// Simulates `reps` independent sums S_n (started from one stationary draw
// each) and applies the case-specific normalization. Self-consistency across
// horizons is checked by running this twice and comparing with ks_two_sample.
inline SumsResult partial_sums_experiment(const ModelSpec& model, SumsCase kase, std::uint64_t n,
                                          std::size_t reps, const RngStream& base,
                                          unsigned workers = 0, const SumsOptions& opts = {}) {
    if (kase != expected_sums_case(model))
        throw std::invalid_argument("sums case does not match the model's innovation law (" +
                                    to_string(expected_sums_case(model)) + " expected)");

    SumsResult out;
    out.kase = kase;
    out.n = n;
    out.reps = reps;

    const bool needs_presample =
        kase == SumsCase::Unit || kase == SumsCase::MidStable || kase == SumsCase::Boundary;
    std::vector<double> pre;
    if (needs_presample) {
        pre = detail::stationary_presample(model, opts.stationary, opts.pre_sample_size,
                                           base.substream(fnv1a("presample")), workers);
    }

    const double nd = static_cast<double>(n);
    switch (kase) {
        case SumsCase::SubCritical:
            out.a_n = model.innovation_law.b_n(n);
            out.centering = 0.0;
            break;
        case SumsCase::Unit:
            out.a_n = model.innovation_law.b_n(n);
            out.mu_hat = detail::truncated_mean(pre, out.a_n);
            out.centering = nd * out.mu_hat;
            break;
        case SumsCase::MidStable:
            out.a_n = model.innovation_law.b_n(n);
            out.mu_hat = stable_mean(pre);
            out.centering = nd * out.mu_hat;
            break;
        case SumsCase::Boundary:
            out.a_n = detail::boundary_a_n(pre, n);
            out.mu_hat = stable_mean(pre);
            out.centering = nd * out.mu_hat;
            break;
        case SumsCase::Gaussian: {
            // Renewal-cycle variance oracle: v = E[(W - mu sigma)^2] / E[sigma]
            // with mu the model's exact stationary mean.
            const double mu =
                model.innovation_law.mean() / (1.0 - model.phi_law.mean());
            RngStream cycle_rng = base.substream(fnv1a("variance-cycles"));
            const auto cycles = collect_cycles(model, opts.variance_cycles, cycle_rng);
            double num = 0.0, den = 0.0;
            for (const auto& c : cycles) {
                const double d = static_cast<double>(c.w) - mu * static_cast<double>(c.sigma);
                num += d * d;
                den += static_cast<double>(c.sigma);
            }
            const double v = num / den;
            out.mu_hat = mu;
            out.centering = nd * mu;
            out.a_n = std::sqrt(nd * v);
            break;
        }
    }

    const StationarySampler start_sampler(model, opts.stationary);
    out.normalized.resize(reps);
    const double a_n = out.a_n;
    const double centering = out.centering;
    parallel_replicas(reps, workers, [&](std::size_t r) {
        RngStream rng = base.substream(r);
        std::uint64_t x = start_sampler.draw(rng);
        double s = 0.0;
        for (std::uint64_t k = 0; k < n; ++k) {
            const double phi = model.phi_law.sample(rng);
            const std::uint64_t survivors = thin(x, phi, rng);
            x = survivors + model.innovation_law.sample(rng);
            s += static_cast<double>(x);
        }
        out.normalized[r] = (s - centering) / a_n;
    });

    out.all_nonnegative =
        std::all_of(out.normalized.begin(), out.normalized.end(),
                    [](double v) { return v >= 0.0; });

    if (kase == SumsCase::Gaussian) {
        out.normal_ks = ks_one_sample(Ecdf(out.normalized),
                                      [](double x) { return normal_cdf(x); });
    } else {
        std::vector<double> positives;
        positives.reserve(out.normalized.size());
        for (double v : out.normalized) {
            if (v > 0.0) positives.push_back(v);
        }
        const std::size_t k = hill_default_k(positives.size());
        if (positives.size() >= 40 && k >= 10) {
            out.tail_fit = hill_estimate(std::move(positives), k);
        }
    }
    return out;
}

// --------------------------------------------------------------------------
// regeneration cycles: W tail and sigma geometric fit
// --------------------------------------------------------------------------

struct CycleTailResult {
    std::size_t cycles = 0;
    TailFit w_fit;                    // Hill on the W sample
    double w_tail_constant = 0.0;     // h(t) * P(W > t) readout (heavy laws)
    GeomTailFit sigma_fit;
    double sigma_lag1_corr = 0.0;
    double mean_sigma = 0.0;
};

inline CycleTailResult cycle_tail_experiment(const ModelSpec& model, std::size_t count,
                                             const RngStream& base) {
    RngStream rng = base.substream(fnv1a("cycles"));
    const auto cycles = collect_cycles(model, count, rng);
    std::vector<double> w(cycles.size());
    std::vector<std::uint64_t> sigma(cycles.size());
    double sigma_sum = 0.0;
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        w[i] = static_cast<double>(cycles[i].w);
        sigma[i] = cycles[i].sigma;
        sigma_sum += static_cast<double>(cycles[i].sigma);
    }
    CycleTailResult out;
    out.cycles = cycles.size();
    out.mean_sigma = sigma_sum / static_cast<double>(cycles.size());
    out.sigma_fit = geometric_tail_fit(sigma);
    out.sigma_lag1_corr = lag1_correlation(sigma);
    out.w_fit = hill_estimate(w, hill_default_k(w.size()));
    if (model.innovation_law.heavy_tailed()) {
        const InnovationLaw& law = model.innovation_law;
        std::sort(w.begin(), w.end());
        out.w_tail_constant = detail::tail_constant(
            w, [&law](double t) { return law.h(t); }, hill_default_k(w.size()));
    }
    return out;
}

// --------------------------------------------------------------------------
// total-progeny tail constant
// --------------------------------------------------------------------------

struct YTailResult {
    double c_hat = 0.0;
    double target = 0.0;
    double rel_error = 0.0;
    TailFit fit;
    std::size_t reps = 0;
};

// c_hat: tail constant of Y = total progeny of one wave (z0 ~ Z);
// target: Monte Carlo mean of (1 + sum_i prod_{j<=i} phi_j)^alpha, truncated
// once the running product's geometric residual drops below 1e-6.
inline YTailResult y_tail_constant_experiment(const ModelSpec& model, std::size_t reps,
                                              const RngStream& base, unsigned workers = 0) {
    if (!model.innovation_law.heavy_tailed())
        throw std::invalid_argument("total-progeny tail experiment needs the heavy-tailed law");
    const double alpha = model.innovation_law.tail_index();

    std::vector<double> ys(reps);
    parallel_replicas(reps, workers, [&](std::size_t i) {
        RngStream rng = base.substream(i);
        const std::uint64_t z0 = model.innovation_law.sample(rng);
        ys[i] = static_cast<double>(total_progeny(z0, model.phi_law, rng));
    });

    const double mean_phi = model.phi_law.mean();
    const double residual_factor = mean_phi / std::max(1e-300, 1.0 - mean_phi);
    std::vector<double> targets(reps);
    const RngStream tbase = base.substream(fnv1a("target"));
    parallel_replicas(reps, workers, [&](std::size_t i) {
        RngStream rng = tbase.substream(i);
        double p = 1.0;
        double s = 1.0;
        while (p * residual_factor >= 1e-6) {
            p *= model.phi_law.sample(rng);
            s += p;
        }
        targets[i] = std::pow(s, alpha);
    });

    YTailResult out;
    out.reps = reps;
    const InnovationLaw& law = model.innovation_law;
    out.fit = hill_estimate(ys, hill_default_k(reps),
                            [&law](double t) { return law.h(t); });
    out.c_hat = out.fit.c_hat;
    out.target = stable_mean(targets);
    out.rel_error = std::fabs(out.c_hat / out.target - 1.0);
    return out;
}

// --------------------------------------------------------------------------
// law of large numbers
// --------------------------------------------------------------------------

struct LlnResult {
    double s_over_n = 0.0;
    double target = 0.0;
    double rel_error = 0.0;
    std::uint64_t n = 0;
};

inline LlnResult lln_check(const ModelSpec& model, std::uint64_t n, const RngStream& base) {
    double target;
    try {
        target = model.innovation_law.mean() / (1.0 - model.phi_law.mean());
    } catch (const std::domain_error&) {
        throw std::invalid_argument("lln check requires a finite-mean innovation law");
    }
    RngStream rng = base.substream(fnv1a("lln"));
    std::uint64_t x = 0;
    double s = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
        const double phi = model.phi_law.sample(rng);
        const std::uint64_t survivors = thin(x, phi, rng);
        x = survivors + model.innovation_law.sample(rng);
        s += static_cast<double>(x);
    }
    LlnResult out;
    out.n = n;
    out.s_over_n = s / static_cast<double>(n);
    out.target = target;
    out.rel_error = target == 0.0 ? std::fabs(out.s_over_n)
                                  : std::fabs(out.s_over_n - target) / target;
    return out;
}

}  // namespace rcinar
