#pragma once

// Counter-based splittable random streams. Every stream is identified by
// (master_seed, stream_id); output i is a pure function of that pair and i,
// so streams can be replayed, forked, and read at arbitrary positions
// without shared state.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace rcinar {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's constants).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(a ^ (0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2) + mix64(b)));
}

// FNV-1a over a name; keys experiment labels into the stream-id space.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Replica r of experiment e draws from stream_id_for(e, r).
constexpr std::uint64_t stream_id_for(std::string_view experiment, std::uint64_t replica) noexcept {
    return hash_combine(fnv1a(experiment), replica);
}

class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : master_seed_(master_seed),
          stream_id_(stream_id),
          position_(0),
          base_(mix64(master_seed ^ mix64(stream_id ^ 0xA5A5A5A55A5A5A5AULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t position() const { return position_; }
    void seek(std::uint64_t position) { position_ = position; }

    // Output at an explicit counter value; does not advance the stream.
    result_type value_at(std::uint64_t pos) const {
        return mix64(base_ + 0x9E3779B97F4A7C15ULL * (pos + 1));
    }

    result_type operator()() { return value_at(position_++); }

    // Uniform on [0,1) with 53 random bits.
    double u01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1); never returns an exact endpoint.
    double u01_open() {
        return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
    }

    double u01_at(std::uint64_t pos) const {
        return static_cast<double>(value_at(pos) >> 11) * 0x1.0p-53;
    }

    // Standard exponential.
    double exp1() { return -std::log(u01_open()); }

    // Independent child stream; substream ids live in a salted id space so
    // they cannot collide with replica ids produced by stream_id_for.
    RngStream substream(std::uint64_t k) const {
        return RngStream(master_seed_, hash_combine(stream_id_ ^ 0xC2B2AE3D27D4EB4FULL, k));
    }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::uint64_t position_;
    std::uint64_t base_;
};

// Standard normal via Marsaglia's polar method. Stateless: the paired draw
// is discarded so the consumption pattern stays position-predictable.
inline double normal01(RngStream& rng) {
    for (;;) {
        const double u = 2.0 * rng.u01() - 1.0;
        const double v = 2.0 * rng.u01() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

}  // namespace rcinar
