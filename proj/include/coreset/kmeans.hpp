#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coreset/matrix.hpp"
#include "coreset/rng.hpp"

namespace coreset {

// k centroids in d dimensions, row-major, double precision.
struct CentroidSet {
    std::size_t k = 0;
    std::size_t d = 0;
    std::vector<double> values;

    std::span<double> row(std::size_t i) { return {values.data() + i * d, d}; }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * d, d};
    }
};

struct KMeansConfig {
    std::size_t k = 0;
    std::size_t max_iters = 100;
    double tol = 1e-6;  // convergence: max centroid displacement <= tol
    std::size_t restarts = 10;
};

struct KMeansResult {
    CentroidSet centroids;
    std::vector<std::uint32_t> labels;
    double sse = 0.0;
    std::size_t iterations = 0;
    bool converged = false;  // max centroid displacement reached tol
    std::size_t restart_index = 0;
};

struct AssignResult {
    std::vector<std::uint32_t> labels;
    std::vector<double> distances;  // Euclidean, to the chosen centroid
};

// Squared Euclidean distance between a point row and a centroid row,
// accumulated in double.
double squared_distance(std::span<const double> a, std::span<const double> b);

// Sum over points of w_i * ||x_i - centroid(labels_i)||^2.  `weights` empty
// means unit weights.
double partition_sse(std::span<const double> points, std::size_t n, std::size_t d,
                     std::span<const double> weights,
                     std::span<const std::uint32_t> labels,
                     const CentroidSet& centroids);

// k-means++ seeding: first centroid drawn proportional to weight, each later
// one proportional to weight * squared distance to the nearest chosen
// centroid.  When that mass is all zero (every point coincides with a chosen
// centroid) the next centroid is drawn uniformly.
CentroidSet kmeanspp_init(std::span<const double> points, std::size_t n,
                          std::size_t d, std::span<const double> weights,
                          std::size_t k, SeededRng& rng);

// Lloyd iterations from a given initial CentroidSet.  Assignment breaks
// distance ties toward the lowest centroid index.  An empty cluster is
// repaired by relocating the point farthest from its own centroid (among
// clusters that still hold at least two points; ties toward the lowest point
// index).  Returned centroids are the weighted means of the returned labels,
// and sse is the exact partition SSE of that labeling.  Throws NumericError
// if the SSE ever rises beyond round-off between iterations.
KMeansResult lloyd(std::span<const double> points, std::size_t n, std::size_t d,
                   std::span<const double> weights, const CentroidSet& init,
                   std::size_t max_iters, double tol);

// Full run: `restarts` independent seedings (substream "restart", r of `rng`),
// Lloyd on each, keep the lowest SSE; ties keep the lowest restart index.
KMeansResult kmeans(std::span<const double> points, std::size_t n, std::size_t d,
                    std::span<const double> weights, const KMeansConfig& config,
                    SeededRng& rng);

// Nearest-centroid assignment of every row of `data`, computed in fixed-size
// row blocks (8192) so results do not depend on the thread count.  Ties break
// toward the lowest centroid index.
AssignResult assign_nearest(const EmbeddingMatrix& data,
                            const CentroidSet& centroids, unsigned threads);

}  // namespace coreset
