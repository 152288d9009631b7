#pragma once

#include <cstdint>
#include <string_view>

namespace coreset {

// Seeded, cross-platform deterministic random number generator.
//
// Generator: xoshiro256++ (Blackman & Vigna). State transition:
//   out  = rotl(s0 + s3, 23) + s0
//   t    = s1 << 17
//   s2 ^= s0;  s3 ^= s1;  s1 ^= s2;  s0 ^= s3;  s2 ^= t;  s3 = rotl(s3, 45)
// The four state words are produced from the 64-bit key by four successive
// splitmix64 steps, so identical seeds give identical streams on every
// platform (the transition uses only shifts, xors and adds).
//
// Substreams: split(tag, index) derives an independent child key as
//   k1    = mix64(key ^ fnv1a64(tag))
//   child = mix64(k1 + GOLDEN * (index + 1))
// where mix64 is the splitmix64 finalizer and GOLDEN = 0x9E3779B97F4A7C15.
// split() reads only the key, never the stream position, so substreams can
// be derived up front and handed to parallel workers.
//
// Integer and uniform-double outputs are bit-exact across platforms.
// next_normal uses Box-Muller (log/cos), so its low bits additionally
// depend on the platform's libm rounding; identical within one build.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Uniform in [0, bound). bound = 0 is invalid. Masked rejection, unbiased.
    std::uint64_t next_below(std::uint64_t bound);

    // Standard normal deviate (Box-Muller, second value cached).
    double next_normal();

    // Independent substream keyed by (tag, index); see class comment.
    SeededRng split(std::string_view tag, std::uint64_t index = 0) const;

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t state_[4];
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// splitmix64 finalizer; exposed for tests and for hash mixing elsewhere.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace coreset
