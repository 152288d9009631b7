#pragma once

#include <cstdint>
#include <vector>

#include "coreset/matrix.hpp"
#include "coreset/rng.hpp"
#include "coreset/selection.hpp"

namespace coreset {

enum class SampleMode {
    stochastic,          // weighted sampling without replacement (default)
    deterministic_band,  // q consecutive ranks starting at floor(eta*(m-q))
};

struct PruneConfig {
    std::size_t n_c = 0;           // clustering-subset size
    std::vector<std::size_t> ks;   // clusters per level, non-increasing
    double rho = 1.0;              // retained fraction in (0,1]
    double eta = 0.0;              // 0 = hug centroids, 1 = hug boundaries
    SampleMode mode = SampleMode::stochastic;
    double sharpness = 8.0;        // c > 0, stochastic mode only
    std::uint64_t seed = 0;
    bool normalize = false;        // L2-normalize rows before clustering
    bool mass_weighted = false;    // see HierarchyParams
    double tol = 1e-6;
    std::size_t max_iters = 100;
    std::size_t restarts = 10;
    unsigned threads = 1;

    void validate(std::size_t n) const;
};

// Equal-share water-filling: the largest common cap such that capping every
// cluster at it stays within `target`, then one extra slot each to the
// largest still-capped clusters (ties -> lowest index) until the sum is
// exactly `target`.  Minimizes the maximum quota over feasible allocations.
std::vector<std::uint64_t> quota_allocate(const std::vector<std::uint64_t>& sizes,
                                          std::uint64_t target);

struct RankedMember {
    std::uint64_t index = 0;  // dataset row
    double distance = 0.0;    // to the cluster centroid
};

// Pick q members of one cluster.  Members are ranked by distance ascending
// (ties -> lowest index) with normalized rank r = rank/(m-1) (r = 0 when
// m = 1).  deterministic_band takes the q consecutive ranks starting at
// floor(eta*(m-q)).  stochastic draws without replacement with log-weight
// l_i = sharpness*(1-2*eta)*(1-r_i) via the exponential-race trick, so
// eta = 0.5 is exactly uniform.  Returned indices are sorted ascending.
std::vector<std::uint64_t> sample_within_cluster(std::vector<RankedMember> members,
                                                 std::size_t q, double eta,
                                                 SampleMode mode, double sharpness,
                                                 SeededRng& rng);

// The full pipeline: random subset of n_c rows -> hierarchical k-means ->
// assign every row to a final-level centroid (in fixed 8192-row blocks) ->
// water-fill quotas toward round(rho*n) -> sample within each cluster.
// Deterministic given config.seed; never mutates `features`.
Selection prune(const EmbeddingMatrix& features, const PruneConfig& config);

}  // namespace coreset
