#pragma once

#include <cstdint>
#include <vector>

#include "coreset/matrix.hpp"

namespace coreset {

struct SynthConfig {
    std::size_t n = 0;      // samples
    std::size_t d = 0;      // dimension
    std::size_t m = 0;      // concepts (>= 2)
    double s = 1.0;         // zipf exponent (>= 0)
    double sigma = 1.0;     // intra-concept noise scale
    double gamma = 8.0;     // minimum pairwise mean separation, in units of sigma
    std::uint64_t seed = 0;

    void validate() const;
};

// p_j proportional to j^(-s) for j = 1..m, normalized to sum 1.
std::vector<double> zipf_proportions(std::size_t m, double s);

// Concept means for the generated dataset: axis-aligned construction when
// d >= m (mean j sits at sep/sqrt(2) on axis j, all pairs exactly sep apart),
// otherwise a 1-D line along axis 0 at multiples of sep (adjacent pairs at
// the minimum).  sep = gamma * sigma, or gamma alone when sigma = 0 so a
// noiseless dataset still has distinct concepts.
std::vector<double> concept_means(const SynthConfig& config);

// Heavy-tailed synthetic dataset: each row draws a concept from
// zipf_proportions, then mean + Gaussian(sigma) per coordinate; labels carry
// the 0-based concept ids.  Row i uses substream ("row", i) of the seed, so
// generation is reproducible and block-parallel friendly.
EmbeddingMatrix generate(const SynthConfig& config);

}  // namespace coreset
