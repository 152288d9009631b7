#include "coreset/rng.hpp"

#include <cmath>
#include <numbers>

#include "coreset/errors.hpp"

namespace coreset {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// Full splitmix64 step: advances the state and returns the mixed output.
std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += kGolden;
    return mix64(state);
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

SeededRng::SeededRng(std::uint64_t seed) : key_(seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
}

std::uint64_t SeededRng::next_u64() {
    const std::uint64_t out = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return out;
}

double SeededRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::next_below(std::uint64_t bound) {
    if (bound == 0) throw DataError("next_below: bound must be positive");
    if (bound == 1) return 0;
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
        const std::uint64_t x = next_u64() & mask;
        if (x < bound) return x;
    }
}

double SeededRng::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

SeededRng SeededRng::split(std::string_view tag, std::uint64_t index) const {
    const std::uint64_t k1 = mix64(key_ ^ fnv1a64(tag));
    return SeededRng(mix64(k1 + kGolden * (index + 1)));
}

}  // namespace coreset
