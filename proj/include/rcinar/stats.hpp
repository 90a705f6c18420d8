#pragma once

// Estimators and test statistics used by the limit experiments: empirical
// CDFs, one- and two-sample Kolmogorov-Smirnov distances, the Hill tail-index
// estimator with a tail-constant readout, and the log-survival regression
// used for the regeneration-time geometric fit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace rcinar {

// Asymptotic KS critical coefficient at the 1% level.
inline constexpr double kKsCoefficient01 = 1.628;

// Permutation-invariant mean: sorted Kahan summation, so reported statistics
// do not depend on replica ordering.
inline double stable_mean(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("stable_mean: empty sample");
    std::sort(values.begin(), values.end());
    double sum = 0.0, comp = 0.0;
    for (double v : values) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(values.size());
}

inline double sample_variance(const std::vector<double>& values) {
    if (values.size() < 2) throw std::invalid_argument("sample_variance: need >= 2 values");
    const double m = stable_mean(values);
    double acc = 0.0;
    for (double v : values) acc += (v - m) * (v - m);
    return acc / static_cast<double>(values.size() - 1);
}

// Order statistic at level q in [0,1] of a sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

class Ecdf {
public:
    explicit Ecdf(std::vector<double> sample) : xs_(std::move(sample)) {
        if (xs_.empty()) throw std::invalid_argument("ecdf: empty sample");
        std::sort(xs_.begin(), xs_.end());
    }

    // P(X <= x); right-continuous step function.
    double operator()(double x) const {
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        return static_cast<double>(it - xs_.begin()) / static_cast<double>(xs_.size());
    }

    std::size_t size() const { return xs_.size(); }
    const std::vector<double>& sorted() const { return xs_; }

private:
    std::vector<double> xs_;
};

struct KsResult {
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

inline KsResult make_ks_result(double statistic, double threshold) {
    return KsResult{statistic, threshold, statistic <= threshold};
}

inline double ks_two_sample_statistic(const Ecdf& a, const Ecdf& b) {
    const auto& xs = a.sorted();
    const auto& ys = b.sorted();
    const double m = static_cast<double>(xs.size());
    const double n = static_cast<double>(ys.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xs.size() && j < ys.size()) {
        const double x = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] <= x) ++i;
        while (j < ys.size() && ys[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / m - static_cast<double>(j) / n));
    }
    return d;
}

inline KsResult ks_two_sample(const Ecdf& a, const Ecdf& b) {
    const double m = static_cast<double>(a.size());
    const double n = static_cast<double>(b.size());
    return make_ks_result(ks_two_sample_statistic(a, b),
                          kKsCoefficient01 * std::sqrt((m + n) / (m * n)));
}

inline KsResult ks_two_sample(const Ecdf& a, const Ecdf& b, double threshold) {
    return make_ks_result(ks_two_sample_statistic(a, b), threshold);
}

// One-sample KS against an analytic CDF. For a discrete target pass its left
// limit as well; for continuous targets the default (cdf itself) is exact.
inline double ks_one_sample_statistic(const Ecdf& sample,
                                      const std::function<double(double)>& cdf,
                                      const std::function<double(double)>& cdf_left = {}) {
    const auto& xs = sample.sorted();
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < xs.size()) {
        const double x = xs[i];
        std::size_t j = i;
        while (j < xs.size() && xs[j] == x) ++j;
        const double below = static_cast<double>(i) / n;   // F_n just left of x
        const double at = static_cast<double>(j) / n;      // F_n at x
        const double fx = cdf(x);
        const double fx_left = cdf_left ? cdf_left(x) : fx;
        d = std::max({d, std::fabs(at - fx), std::fabs(below - fx_left)});
        i = j;
    }
    return d;
}

inline KsResult ks_one_sample(const Ecdf& sample, const std::function<double(double)>& cdf,
                              const std::function<double(double)>& cdf_left = {}) {
    return make_ks_result(ks_one_sample_statistic(sample, cdf, cdf_left),
                          kKsCoefficient01 / std::sqrt(static_cast<double>(sample.size())));
}

inline KsResult ks_one_sample(const Ecdf& sample, const std::function<double(double)>& cdf,
                              const std::function<double(double)>& cdf_left, double threshold) {
    return make_ks_result(ks_one_sample_statistic(sample, cdf, cdf_left), threshold);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// --------------------------------------------------------------------------
// tail estimation
// --------------------------------------------------------------------------

struct TailFit {
    double alpha_hat = 0.0;
    double c_hat = 0.0;  // limit of h(t) * P(X > t)
    std::size_t k_used = 0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

inline std::size_t hill_default_k(std::size_t n) {
    return static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
}

namespace detail {

// Mean of h(t) * empirical survival over the top-tail quantile grid
// j in [k/4, k], with t the (1 - j/n) order statistic. Tie-safe: survival
// is counted, not assumed to be j/n.
inline double tail_constant(const std::vector<double>& sorted,
                            const std::function<double(double)>& h, std::size_t k) {
    const std::size_t n = sorted.size();
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t j = std::max<std::size_t>(1, k / 4); j <= k; ++j) {
        const double t = sorted[n - j];
        if (!(t > 0.0)) continue;
        const auto gt = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
        acc += h(t) * static_cast<double>(gt) / static_cast<double>(n);
        ++used;
    }
    if (used == 0) throw std::domain_error("tail constant: no positive tail");
    return acc / static_cast<double>(used);
}

inline double hill_alpha(const std::vector<double>& sorted, std::size_t k) {
    const std::size_t n = sorted.size();
    const double x_floor = sorted[n - 1 - k];
    if (!(x_floor > 0.0))
        throw std::domain_error("hill: tail order statistics must be positive");
    double logsum = 0.0;
    for (std::size_t i = 1; i <= k; ++i) logsum += std::log(sorted[n - i] / x_floor);
    if (!(logsum > 0.0)) throw std::domain_error("hill: no tail variation in sample");
    return static_cast<double>(k) / logsum;
}

}  // namespace detail

// Hill estimator of the tail index plus the tail constant measured against a
// caller-supplied normalizing function h. When no h is given, the fitted
// power law t^{alpha_hat} is used. The confidence band is the asymptotic
// order-of-magnitude band c_hat * (1 +- 2/sqrt(k)); it depends only on the
// sample multiset, never on replica ordering.
inline TailFit hill_estimate(std::vector<double> sample, std::size_t k,
                             std::function<double(double)> h = {}) {
    const std::size_t n = sample.size();
    if (k < 10) throw std::invalid_argument("hill: k must be >= 10");
    if (k >= n / 2) throw std::invalid_argument("hill: k must be < n/2");
    for (double v : sample) {
        if (v < 0.0) throw std::invalid_argument("hill: sample contains negative values");
    }
    std::sort(sample.begin(), sample.end());

    TailFit fit;
    fit.k_used = k;
    fit.alpha_hat = detail::hill_alpha(sample, k);
    const double alpha_for_h = fit.alpha_hat;
    if (!h) h = [alpha_for_h](double t) { return std::pow(t, alpha_for_h); };
    fit.c_hat = detail::tail_constant(sample, h, k);
    const double band = 2.0 * fit.c_hat / std::sqrt(static_cast<double>(k));
    fit.ci_low = fit.c_hat - band;
    fit.ci_high = fit.c_hat + band;
    return fit;
}

// --------------------------------------------------------------------------
// regression on log-survival (geometric cycle-length fit)
// --------------------------------------------------------------------------

struct GeomTailFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
    bool degenerate = false;
};

// OLS of log P(sigma > t) on integer t over the [q50, q99] range.
inline GeomTailFit geometric_tail_fit(std::span<const std::uint64_t> sigmas) {
    if (sigmas.empty()) throw std::invalid_argument("geometric fit: empty sample");
    std::vector<std::uint64_t> sorted(sigmas.begin(), sigmas.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const std::uint64_t q50 = sorted[n / 2];
    const std::uint64_t q99 = sorted[static_cast<std::size_t>(0.99 * static_cast<double>(n - 1))];

    GeomTailFit fit;
    if (q99 <= q50 + 1) {
        fit.degenerate = true;
        return fit;
    }
    std::vector<double> ts, logs;
    for (std::uint64_t t = q50; t <= q99; ++t) {
        // count of sigma > t
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
        const std::size_t gt = static_cast<std::size_t>(sorted.end() - it);
        if (gt == 0) break;
        ts.push_back(static_cast<double>(t));
        logs.push_back(std::log(static_cast<double>(gt) / static_cast<double>(n)));
    }
    if (ts.size() < 3) {
        fit.degenerate = true;
        return fit;
    }
    const double m = static_cast<double>(ts.size());
    const double tx = std::accumulate(ts.begin(), ts.end(), 0.0) / m;
    const double ty = std::accumulate(logs.begin(), logs.end(), 0.0) / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxx += (ts[i] - tx) * (ts[i] - tx);
        sxy += (ts[i] - tx) * (logs[i] - ty);
        syy += (logs[i] - ty) * (logs[i] - ty);
    }
    fit.slope = sxy / sxx;
    fit.intercept = ty - fit.slope * tx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.points = ts.size();
    return fit;
}

// Pearson correlation between consecutive entries; the regeneration
// independence check.
inline double lag1_correlation(std::span<const std::uint64_t> xs) {
    if (xs.size() < 3) throw std::invalid_argument("lag1 correlation: need >= 3 values");
    const std::size_t n = xs.size() - 1;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += static_cast<double>(xs[i]);
        mb += static_cast<double>(xs[i + 1]);
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = static_cast<double>(xs[i]) - ma;
        const double db = static_cast<double>(xs[i + 1]) - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace rcinar
