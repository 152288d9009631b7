#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coreset/matrix.hpp"

namespace coreset {

enum class ProbeTask { classification, regression };

struct ProbeReport {
    ProbeTask task = ProbeTask::classification;
    std::size_t k = 0;
    double metric = 0.0;  // accuracy in [0,1] or RMSE >= 0
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

struct BalanceReport {
    double entropy = 0.0;  // normalized to [0,1]
    std::vector<std::uint64_t> class_counts;
    double cv = 0.0;          // std/mean of counts
    double redundancy = 0.0;  // fraction with nearest other point within eps
};

// k nearest neighbors by Euclidean distance (ties -> lower train index);
// classification = majority vote (ties -> smallest class id), regression =
// mean of neighbor targets.  Targets are the train labels as doubles for
// regression.
std::vector<double> knn_predict(const EmbeddingMatrix& train_emb,
                                std::span<const double> train_targets,
                                const EmbeddingMatrix& query_emb, std::size_t k,
                                ProbeTask task);

// Accuracy (classification; prediction must match the target exactly) or
// RMSE (regression) of knn_predict over the test split.  Caller provides
// disjoint splits; when both carry ids an overlap throws DataError.
ProbeReport probe(const EmbeddingMatrix& train_emb,
                  std::span<const double> train_targets,
                  const EmbeddingMatrix& test_emb,
                  std::span<const double> test_targets, std::size_t k,
                  ProbeTask task);

// Balance and redundancy of a labeled selection.  `total_classes` is the
// number of distinct classes in the FULL dataset, so a selection that drops
// classes scores lower; entropy = H(counts)/ln(total_classes).  Redundancy
// needs at least two points.
BalanceReport balance_metrics(std::span<const std::uint32_t> labels,
                              const EmbeddingMatrix& emb, double eps,
                              std::size_t total_classes);

// Entropy-only variant for callers without geometry (redundancy = 0, cv of
// the class counts).
BalanceReport balance_metrics(std::span<const std::uint32_t> labels,
                              std::size_t total_classes);

}  // namespace coreset
