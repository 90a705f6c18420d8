#pragma once

// Cohort-resolved simulation: tracks X_{k,n}, the count of progeny alive at
// generation n of the immigrants who arrived at time k, and derives age and
// coalescence statistics from it.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rcinar/distributions.hpp"
#include "rcinar/rng.hpp"

namespace rcinar {

struct Cohort {
    std::uint64_t birth;
    std::uint64_t count;  // >= 1; extinct cohorts are dropped eagerly
};

class CohortLedger {
public:
    CohortLedger() = default;

    std::uint64_t generation() const { return n_; }
    const std::vector<Cohort>& cohorts() const { return cohorts_; }

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (const auto& c : cohorts_) t += c.count;
        return t;
    }

    // Advance one generation: thin every cohort independently with phi_n,
    // drop extinct cohorts, then admit the new immigration wave.
    // Returns the post-thinning carry-over (zero means a regeneration).
    std::uint64_t step(double phi_n, std::uint64_t z_n, RngStream& rng) {
        std::size_t out = 0;
        std::uint64_t carried = 0;
        for (std::size_t i = 0; i < cohorts_.size(); ++i) {
            const std::uint64_t kept = thin(cohorts_[i].count, phi_n, rng);
            if (kept > 0) {
                cohorts_[out++] = Cohort{cohorts_[i].birth, kept};
                carried += kept;
            }
        }
        cohorts_.resize(out);
        ++n_;
        if (z_n > 0) cohorts_.push_back(Cohort{n_, z_n});
        return carried;
    }

private:
    std::uint64_t n_ = 0;
    std::vector<Cohort> cohorts_;  // sorted by birth time
};

inline CohortLedger& ledger_step(CohortLedger& ledger, double phi_n, std::uint64_t z_n,
                                 RngStream& rng) {
    ledger.step(phi_n, z_n, rng);
    return ledger;
}

// lambda_n = n - max{k < n : X_{k,n} > 0}; empty when no older cohort lives.
inline std::optional<std::uint64_t> max_age(const CohortLedger& ledger) {
    const auto& cs = ledger.cohorts();
    for (auto it = cs.rbegin(); it != cs.rend(); ++it) {
        if (it->birth < ledger.generation()) return ledger.generation() - it->birth;
    }
    return std::nullopt;
}

// eta_n = sum_k X_{k,n} (n-k) / sum_k X_{k,n}; empty at total zero (the 0/0).
inline std::optional<double> avg_age(const CohortLedger& ledger) {
    double total = 0.0;
    double weighted = 0.0;
    for (const auto& c : ledger.cohorts()) {
        total += static_cast<double>(c.count);
        weighted += static_cast<double>(c.count) *
                    static_cast<double>(ledger.generation() - c.birth);
    }
    if (total == 0.0) return std::nullopt;
    return weighted / total;
}

struct CoalescenceLaw {
    std::map<std::uint64_t, double> pmf;  // age -> probability
    double p_infinity = 0.0;
};

// Exact conditional law of the coalescence time given the ledger state:
// sampling two of the X alive individuals without replacement, the chance
// both descend from cohort k is X_k (X_k - 1) / (X (X - 1)). Computed in
// integer arithmetic before the single normalization, so the masses sum to
// one exactly. Defined for X >= 2.
inline std::optional<CoalescenceLaw> coalescence_law(const CohortLedger& ledger) {
    const std::uint64_t x = ledger.total();
    if (x < 2) return std::nullopt;
    CoalescenceLaw law;
    using u128 = unsigned __int128;
    const u128 denom = static_cast<u128>(x) * (x - 1);
    u128 same_cohort_pairs = 0;  // ordered same-cohort pair count
    for (const auto& c : ledger.cohorts()) {
        if (c.count >= 2) {
            const u128 num = static_cast<u128>(c.count) * (c.count - 1);
            same_cohort_pairs += num;
            law.pmf[ledger.generation() - c.birth] =
                static_cast<double>(num) / static_cast<double>(denom);
        }
    }
    law.p_infinity = static_cast<double>(denom - same_cohort_pairs) /
                     static_cast<double>(denom);
    return law;
}

struct CoalescenceDraw {
    bool finite = false;
    std::uint64_t age = 0;  // valid when finite
};

// Monte Carlo variant of coalescence_law, for cross-validation: draws an
// unordered pair of individuals and reports their coalescence age.
inline std::optional<CoalescenceDraw> sample_coalescence(const CohortLedger& ledger,
                                                         RngStream& rng) {
    const std::uint64_t x = ledger.total();
    if (x < 2) return std::nullopt;
    const std::uint64_t first = std::min<std::uint64_t>(
        x - 1, static_cast<std::uint64_t>(rng.u01() * static_cast<double>(x)));
    std::uint64_t second = std::min<std::uint64_t>(
        x - 2, static_cast<std::uint64_t>(rng.u01() * static_cast<double>(x - 1)));
    if (second >= first) ++second;
    std::uint64_t acc = 0;
    std::optional<std::uint64_t> cohort_first, cohort_second;
    for (const auto& c : ledger.cohorts()) {
        acc += c.count;
        if (!cohort_first && first < acc) cohort_first = c.birth;
        if (!cohort_second && second < acc) cohort_second = c.birth;
        if (cohort_first && cohort_second) break;
    }
    CoalescenceDraw draw;
    if (*cohort_first == *cohort_second) {
        draw.finite = true;
        draw.age = ledger.generation() - *cohort_first;
    }
    return draw;
}

// Total progeny of a single immigration wave of size z0, the wave included:
// c_0 = z0, c_{i+1} = phi_{i+1} o c_i, summed until extinction.
inline std::uint64_t total_progeny(std::uint64_t z0, const PhiLaw& phi_law, RngStream& rng,
                                   std::uint64_t max_generations = 100000000) {
    std::uint64_t c = z0;
    std::uint64_t y = z0;
    std::uint64_t gens = 0;
    while (c > 0) {
        if (++gens > max_generations)
            throw std::runtime_error("total_progeny: generation guard exceeded");
        c = thin(c, phi_law.sample(rng), rng);
        y += c;
    }
    return y;
}

}  // namespace rcinar
