#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "coreset/kmeans.hpp"
#include "coreset/matrix.hpp"
#include "coreset/rng.hpp"

namespace coreset {

struct HierarchyParams {
    std::vector<std::size_t> ks;  // non-increasing, all >= 1
    double tol = 1e-6;
    std::size_t max_iters = 100;
    std::size_t restarts = 10;
    // When true, level t>1 clusters the level-(t-1) centroids weighted by the
    // number of points they absorbed; default treats every centroid equally
    // so large clusters cannot dominate the upper levels.
    bool mass_weighted = false;
};

// Per-level centroid sets; levels[0] clusters the subset itself, each later
// level clusters the centroids one below it.
struct ClusterModel {
    std::vector<CentroidSet> levels;
    HierarchyParams params;

    std::size_t depth() const { return levels.size(); }
    void validate() const;
};

// Build the hierarchy: level 1 = k-means(subset, ks[0]); level t>1 =
// k-means(level t-1 centroids, ks[t-1]).  Each level runs the restart policy
// of the kmeans module on substream ("level", t) of `rng`.
ClusterModel hkmeans(const EmbeddingMatrix& subset, const HierarchyParams& params,
                     SeededRng& rng);
ClusterModel hkmeans(const EmbeddingMatrix& subset,
                     const std::vector<std::size_t>& ks, SeededRng& rng);

const CentroidSet& final_level(const ClusterModel& model);

// Serialization: a text manifest next to one embedding file per level
// ("<stem>.level<t>.emb" beside the manifest).  The embedding payload is
// f32, so a reloaded model carries float-rounded centroids.
void save_cluster_model(const ClusterModel& model,
                        const std::filesystem::path& manifest_path);
ClusterModel load_cluster_model(const std::filesystem::path& manifest_path);

}  // namespace coreset
