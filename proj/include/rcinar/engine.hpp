#pragma once

// The thinning recursion X_n = phi_n o X_{n-1} + Z_n, path simulation,
// stationary-law sampling, and regeneration-cycle collection.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rcinar/distributions.hpp"
#include "rcinar/rng.hpp"

namespace rcinar {

struct ModelSpec {
    PhiLaw phi_law;
    InnovationLaw innovation_law;
};

// Per-step draw order is fixed (phi, thinning, z) so that any two consumers
// of one stream see the identical path.
struct PathSample {
    std::vector<std::uint64_t> x;          // X_0..X_n
    std::vector<std::uint64_t> survivors;  // phi_k o X_{k-1}; index 0 is 0
    std::vector<std::uint64_t> z;          // index 0 is 0
    std::vector<double> phi;               // index 0 is 0
    std::size_t steps() const { return x.empty() ? 0 : x.size() - 1; }
};

struct CycleRecord {
    std::uint64_t sigma = 0;        // cycle length nu_n - nu_{n-1}
    std::uint64_t w = 0;            // sum of the values in r
    std::vector<std::uint64_t> r;   // X_i for nu_{n-1} <= i < nu_n
};

struct StationaryConfig {
    enum class Mode { TruncatedSeries, BurnIn };
    Mode mode = Mode::TruncatedSeries;
    double epsilon = 1e-6;               // total-variation budget of the truncation
    std::optional<double> gamma;         // moment exponent; default min(1, alpha/2)
    std::uint64_t burn_in_steps = 100000;
    std::uint64_t max_terms = 1000000;
};

struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RunawayCycleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::pair<std::uint64_t, std::uint64_t> step(std::uint64_t x_prev, double phi_n,
                                                    std::uint64_t z_n, RngStream& rng) {
    const std::uint64_t survivors = thin(x_prev, phi_n, rng);
    return {survivors + z_n, survivors};
}

inline PathSample simulate_path(const ModelSpec& model, std::uint64_t n, std::uint64_t x0,
                                RngStream& rng) {
    if (n < 1) throw std::invalid_argument("simulate_path: n must be >= 1");
    PathSample out;
    out.x.reserve(n + 1);
    out.survivors.reserve(n + 1);
    out.z.reserve(n + 1);
    out.phi.reserve(n + 1);
    out.x.push_back(x0);
    out.survivors.push_back(0);
    out.z.push_back(0);
    out.phi.push_back(0.0);
    std::uint64_t x = x0;
    for (std::uint64_t k = 1; k <= n; ++k) {
        const double phi = model.phi_law.sample(rng);
        const std::uint64_t survivors = thin(x, phi, rng);
        const std::uint64_t z = model.innovation_law.sample(rng);
        x = survivors + z;
        out.x.push_back(x);
        out.survivors.push_back(survivors);
        out.z.push_back(z);
        out.phi.push_back(phi);
    }
    return out;
}

// Final value only; the burn-in workhorse.
inline std::uint64_t path_final_value(const ModelSpec& model, std::uint64_t n, std::uint64_t x0,
                                      RngStream& rng) {
    std::uint64_t x = x0;
    for (std::uint64_t k = 0; k < n; ++k) {
        const double phi = model.phi_law.sample(rng);
        const std::uint64_t survivors = thin(x, phi, rng);
        x = survivors + model.innovation_law.sample(rng);
    }
    return x;
}

// Pi_k o X: k sequential thinnings.
inline std::uint64_t composite_thin(std::uint64_t x, std::span<const double> phi_draws,
                                    RngStream& rng) {
    std::uint64_t value = x;
    for (double phi : phi_draws) {
        if (value == 0) return 0;
        value = thin(value, phi, rng);
    }
    return value;
}

// One draw approximately from the stationary law. The truncated-series mode
// accumulates Binomial(Z_k, p_k) terms with p_k the running product of phi
// draws, stopping once
//     E[Z^gamma] * p_K^gamma * r / (1 - r) < epsilon,   r = E[phi^gamma],
// which bounds the probability that any discarded term is nonzero
// (1 - (1-p)^z <= (pz)^gamma for gamma <= 1), hence the total-variation
// error of the truncation.
class StationarySampler {
public:
    StationarySampler(const ModelSpec& model, StationaryConfig cfg = {})
        : model_(model), cfg_(cfg) {
        if (!(cfg_.epsilon > 0.0 && cfg_.epsilon <= 0.01))
            throw std::invalid_argument("stationary sampler: epsilon outside (0, 0.01]");
        gamma_ = cfg_.gamma.value_or(
            model.innovation_law.heavy_tailed()
                ? std::min(1.0, model.innovation_law.tail_index() / 2.0)
                : 1.0);
        if (!(gamma_ > 0.0 && gamma_ <= 1.0))
            throw std::invalid_argument("stationary sampler: gamma outside (0, 1]");
        if (model.innovation_law.heavy_tailed() &&
            gamma_ >= model.innovation_law.tail_index())
            throw std::invalid_argument("stationary sampler: gamma must be < alpha");
        ez_gamma_ = model.innovation_law.fractional_moment(gamma_);
        const double r = model.phi_law.moment(gamma_);
        tail_factor_ = ez_gamma_ * r / (1.0 - r);
    }

    double gamma() const { return gamma_; }

    std::uint64_t draw(RngStream& rng) const {
        if (cfg_.mode == StationaryConfig::Mode::BurnIn)
            return path_final_value(model_, cfg_.burn_in_steps, 0, rng);
        std::uint64_t x = model_.innovation_law.sample(rng);  // k = 0 term
        double p = 1.0;
        std::uint64_t k = 0;
        while (residual(p) >= cfg_.epsilon) {
            if (++k > cfg_.max_terms)
                throw NonConvergenceError(
                    "stationary sampler: series truncation exceeded max_terms; "
                    "check the phi law");
            p *= model_.phi_law.sample(rng);
            x += thin(model_.innovation_law.sample(rng), p, rng);
        }
        return x;
    }

private:
    double residual(double p) const {
        if (p <= 0.0) return 0.0;
        return tail_factor_ * (gamma_ == 1.0 ? p : std::pow(p, gamma_));
    }

    ModelSpec model_;
    StationaryConfig cfg_;
    double gamma_ = 1.0;
    double ez_gamma_ = 0.0;
    double tail_factor_ = 0.0;
};

inline std::uint64_t sample_stationary(const ModelSpec& model, const StationaryConfig& cfg,
                                       RngStream& rng) {
    return StationarySampler(model, cfg).draw(rng);
}

// Simulates from X_0 = 0 (so nu_0 = 1 automatically: phi_1 o X_0 = 0) and
// returns the first `count` complete cycles. Regenerations are detected from
// the recorded survivors value, matching the definition of nu_n.
inline std::vector<CycleRecord> collect_cycles(const ModelSpec& model, std::size_t count,
                                               RngStream& rng,
                                               std::uint64_t max_cycle_steps = 100000000) {
    if (count < 1) throw std::invalid_argument("collect_cycles: count must be >= 1");
    std::vector<CycleRecord> out;
    out.reserve(count);
    std::uint64_t x = 0;
    std::uint64_t i = 0;
    std::uint64_t cycle_start = 0;
    CycleRecord open;
    bool has_open = false;
    while (out.size() < count) {
        ++i;
        const double phi = model.phi_law.sample(rng);
        const std::uint64_t survivors = thin(x, phi, rng);
        const std::uint64_t z = model.innovation_law.sample(rng);
        x = survivors + z;
        if (survivors == 0) {
            if (has_open) {
                open.sigma = i - cycle_start;
                out.push_back(std::move(open));
                open = CycleRecord{};
            }
            cycle_start = i;
            has_open = true;
            open.r.clear();
        }
        // has_open is always true from i == 1 on (X_0 = 0 forces survivors 0).
        open.r.push_back(x);
        open.w += x;
        if (i - cycle_start >= max_cycle_steps)
            throw RunawayCycleError("collect_cycles: cycle exceeded the step guard");
    }
    return out;
}

// Slot-coupled path: each step draws phi and z from per-step substreams and
// thins with one shared uniform per individual, so paths started from
// different X_0 under the same base stream are monotone-coupled.
inline PathSample simulate_path_coupled(const ModelSpec& model, std::uint64_t n,
                                        std::uint64_t x0, const RngStream& base) {
    if (n < 1) throw std::invalid_argument("simulate_path_coupled: n must be >= 1");
    PathSample out;
    out.x.push_back(x0);
    out.survivors.push_back(0);
    out.z.push_back(0);
    out.phi.push_back(0.0);
    std::uint64_t x = x0;
    for (std::uint64_t k = 1; k <= n; ++k) {
        RngStream phi_stream = base.substream(3 * k);
        RngStream z_stream = base.substream(3 * k + 1);
        const RngStream slots = base.substream(3 * k + 2);
        const double phi = model.phi_law.sample(phi_stream);
        const std::uint64_t survivors = thin_coupled(x, phi, slots);
        const std::uint64_t z = model.innovation_law.sample(z_stream);
        x = survivors + z;
        out.x.push_back(x);
        out.survivors.push_back(survivors);
        out.z.push_back(z);
        out.phi.push_back(phi);
    }
    return out;
}

}  // namespace rcinar
