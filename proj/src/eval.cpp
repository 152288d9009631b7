#include "coreset/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_set>

#include "coreset/errors.hpp"

namespace coreset {

namespace {

double row_distance2(const EmbeddingMatrix& a, std::size_t i,
                     const EmbeddingMatrix& b, std::size_t j) {
    const auto ra = a.row(i);
    const auto rb = b.row(j);
    double acc = 0.0;
    for (std::size_t c = 0; c < ra.size(); ++c) {
        const double diff = static_cast<double>(ra[c]) - static_cast<double>(rb[c]);
        acc += diff * diff;
    }
    return acc;
}

}  // namespace

std::vector<double> knn_predict(const EmbeddingMatrix& train_emb,
                                std::span<const double> train_targets,
                                const EmbeddingMatrix& query_emb, std::size_t k,
                                ProbeTask task) {
    if (train_emb.n == 0) throw DataError("knn: empty train set");
    if (k == 0) throw DataError("knn: k must be >= 1");
    if (k > train_emb.n) {
        throw DataError("knn: k = " + std::to_string(k) + " exceeds train size " +
                        std::to_string(train_emb.n));
    }
    if (train_targets.size() != train_emb.n) {
        throw DataError("knn: targets size mismatch");
    }
    if (train_emb.d != query_emb.d) throw DataError("knn: dimension mismatch");

    std::vector<double> out(query_emb.n);
    std::vector<std::pair<double, std::size_t>> dist(train_emb.n);
    for (std::size_t q = 0; q < query_emb.n; ++q) {
        for (std::size_t t = 0; t < train_emb.n; ++t) {
            dist[t] = {row_distance2(query_emb, q, train_emb, t), t};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first < b.first;
                              return a.second < b.second;
                          });
        if (task == ProbeTask::regression) {
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += train_targets[dist[j].second];
            out[q] = acc / static_cast<double>(k);
        } else {
            // Majority vote, ties -> smallest class id (map iterates in order).
            std::map<double, std::size_t> votes;
            for (std::size_t j = 0; j < k; ++j) {
                votes[train_targets[dist[j].second]] += 1;
            }
            double best_class = 0.0;
            std::size_t best_votes = 0;
            for (const auto& [cls, cnt] : votes) {
                if (cnt > best_votes) {
                    best_votes = cnt;
                    best_class = cls;
                }
            }
            out[q] = best_class;
        }
    }
    return out;
}

ProbeReport probe(const EmbeddingMatrix& train_emb,
                  std::span<const double> train_targets,
                  const EmbeddingMatrix& test_emb,
                  std::span<const double> test_targets, std::size_t k,
                  ProbeTask task) {
    if (test_targets.size() != test_emb.n) throw DataError("probe: targets size mismatch");
    if (test_emb.n == 0) throw DataError("probe: empty test set");
    if (train_emb.has_ids() && test_emb.has_ids()) {
        std::unordered_set<std::uint64_t> train_ids(train_emb.ids.begin(),
                                                    train_emb.ids.end());
        for (std::uint64_t id : test_emb.ids) {
            if (train_ids.count(id)) {
                throw DataError("probe: train/test splits overlap (id " +
                                std::to_string(id) + ")");
            }
        }
    }

    const std::vector<double> pred =
        knn_predict(train_emb, train_targets, test_emb, k, task);
    ProbeReport report;
    report.task = task;
    report.k = k;
    report.train_size = train_emb.n;
    report.test_size = test_emb.n;
    if (task == ProbeTask::classification) {
        std::size_t correct = 0;
        for (std::size_t q = 0; q < pred.size(); ++q) {
            if (pred[q] == test_targets[q]) ++correct;
        }
        report.metric = static_cast<double>(correct) / static_cast<double>(pred.size());
    } else {
        double acc = 0.0;
        for (std::size_t q = 0; q < pred.size(); ++q) {
            const double diff = pred[q] - test_targets[q];
            acc += diff * diff;
        }
        report.metric = std::sqrt(acc / static_cast<double>(pred.size()));
    }
    return report;
}

BalanceReport balance_metrics(std::span<const std::uint32_t> labels,
                              std::size_t total_classes) {
    if (labels.empty()) throw DataError("balance: empty labels");
    if (total_classes == 0) throw DataError("balance: total_classes must be >= 1");
    BalanceReport report;
    report.class_counts.assign(total_classes, 0);
    for (std::uint32_t l : labels) {
        if (l >= total_classes) {
            throw DataError("balance: label " + std::to_string(l) +
                            " outside total_classes");
        }
        report.class_counts[l] += 1;
    }

    const double n = static_cast<double>(labels.size());
    double h = 0.0;
    for (std::uint64_t c : report.class_counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    report.entropy =
        total_classes > 1 ? h / std::log(static_cast<double>(total_classes)) : 0.0;

    const double m = static_cast<double>(total_classes);
    double mean = 0.0;
    for (std::uint64_t c : report.class_counts) mean += static_cast<double>(c);
    mean /= m;
    double var = 0.0;
    for (std::uint64_t c : report.class_counts) {
        const double diff = static_cast<double>(c) - mean;
        var += diff * diff;
    }
    var /= m;
    report.cv = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
    return report;
}

BalanceReport balance_metrics(std::span<const std::uint32_t> labels,
                              const EmbeddingMatrix& emb, double eps,
                              std::size_t total_classes) {
    if (labels.size() != emb.n) throw DataError("balance: labels/rows mismatch");
    if (emb.n < 2) {
        throw DataError("balance: redundancy needs at least two points");
    }
    if (!(eps >= 0.0)) throw DataError("balance: eps must be >= 0");
    BalanceReport report = balance_metrics(labels, total_classes);

    const double eps2 = eps * eps;
    std::size_t redundant = 0;
    for (std::size_t i = 0; i < emb.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < emb.n; ++j) {
            if (j == i) continue;
            best = std::min(best, row_distance2(emb, i, emb, j));
            if (best <= eps2) break;
        }
        if (best <= eps2) ++redundant;
    }
    report.redundancy = static_cast<double>(redundant) / static_cast<double>(emb.n);
    return report;
}

}  // namespace coreset
