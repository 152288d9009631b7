#include "coreset/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coreset/errors.hpp"
#include "coreset/parallel.hpp"

namespace coreset {

namespace {

constexpr std::size_t kAssignBlock = 8192;

double point_weight(std::span<const double> weights, std::size_t i) {
    return weights.empty() ? 1.0 : weights[i];
}

void check_inputs(std::span<const double> points, std::size_t n, std::size_t d,
                  std::span<const double> weights, std::size_t k) {
    if (d == 0) throw DataError("kmeans: dimension must be >= 1");
    if (points.size() != n * d) throw DataError("kmeans: points size != n*d");
    if (!weights.empty() && weights.size() != n) {
        throw DataError("kmeans: weights size != n");
    }
    if (k == 0) throw DataError("kmeans: k must be >= 1");
    if (k > n) throw DataError("kmeans: k exceeds point count");
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw DataError("kmeans: weights must be finite and positive");
        }
    }
}

std::span<const double> point_row(std::span<const double> points, std::size_t d,
                                  std::size_t i) {
    return points.subspan(i * d, d);
}

// Draw an index proportional to mass[i]; caller guarantees total > 0.
std::size_t sample_discrete(const std::vector<double>& mass, double total,
                            SeededRng& rng) {
    const double u = rng.next_double() * total;
    double acc = 0.0;
    std::size_t last = mass.size();
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] <= 0.0) continue;
        acc += mass[i];
        last = i;
        if (u < acc) return i;
    }
    return last;  // u landed on total due to round-off
}

std::uint32_t nearest_centroid(std::span<const double> x, const CentroidSet& c,
                               double* out_d2 = nullptr) {
    std::uint32_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c.k; ++j) {
        const double d2 = squared_distance(x, c.row(j));
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<std::uint32_t>(j);
        }
    }
    if (out_d2) *out_d2 = best_d2;
    return best;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

double partition_sse(std::span<const double> points, std::size_t n, std::size_t d,
                     std::span<const double> weights,
                     std::span<const std::uint32_t> labels,
                     const CentroidSet& centroids) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += point_weight(weights, i) *
               squared_distance(point_row(points, d, i), centroids.row(labels[i]));
    }
    return acc;
}

CentroidSet kmeanspp_init(std::span<const double> points, std::size_t n,
                          std::size_t d, std::span<const double> weights,
                          std::size_t k, SeededRng& rng) {
    check_inputs(points, n, d, weights, k);
    CentroidSet out;
    out.k = k;
    out.d = d;
    out.values.reserve(k * d);

    std::vector<double> mass(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mass[i] = point_weight(weights, i);
        total += mass[i];
    }
    std::size_t first = sample_discrete(mass, total, rng);
    auto push_point = [&](std::size_t i) {
        const auto row = point_row(points, d, i);
        out.values.insert(out.values.end(), row.begin(), row.end());
    };
    push_point(first);

    std::vector<double> best_d2(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
        const auto newest =
            std::span<const double>(out.values.data() + (c - 1) * d, d);
        total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            best_d2[i] =
                std::min(best_d2[i], squared_distance(point_row(points, d, i), newest));
            mass[i] = point_weight(weights, i) * best_d2[i];
            total += mass[i];
        }
        std::size_t next =
            total > 0.0 ? sample_discrete(mass, total, rng) : rng.next_below(n);
        push_point(next);
    }
    return out;
}

KMeansResult lloyd(std::span<const double> points, std::size_t n, std::size_t d,
                   std::span<const double> weights, const CentroidSet& init,
                   std::size_t max_iters, double tol) {
    check_inputs(points, n, d, weights, init.k);
    if (init.d != d) throw DataError("lloyd: centroid dimension mismatch");
    const std::size_t k = init.k;

    KMeansResult res;
    res.centroids = init;
    res.labels.assign(n, 0);

    std::vector<double> sums(k * d);
    std::vector<double> cluster_weight(k);
    std::vector<std::size_t> cluster_count(k);
    double prev_sse = std::numeric_limits<double>::infinity();
    double sse0 = 0.0;

    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        res.iterations = iter;
        for (std::size_t i = 0; i < n; ++i) {
            res.labels[i] = nearest_centroid(point_row(points, d, i), res.centroids);
        }

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(cluster_weight.begin(), cluster_weight.end(), 0.0);
        std::fill(cluster_count.begin(), cluster_count.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = point_weight(weights, i);
            const auto row = point_row(points, d, i);
            double* s = sums.data() + res.labels[i] * d;
            for (std::size_t j = 0; j < d; ++j) s[j] += w * row[j];
            cluster_weight[res.labels[i]] += w;
            ++cluster_count[res.labels[i]];
        }

        CentroidSet next;
        next.k = k;
        next.d = d;
        next.values.assign(k * d, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            if (cluster_count[c] == 0) continue;  // repaired below
            for (std::size_t j = 0; j < d; ++j) {
                next.values[c * d + j] = sums[c * d + j] / cluster_weight[c];
            }
        }

        // Empty-cluster repair: hand the farthest point of any multi-point
        // cluster to the empty one, lowest point index on distance ties.
        for (std::size_t c = 0; c < k; ++c) {
            if (cluster_count[c] != 0) continue;
            std::size_t pick = n;
            double pick_d2 = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (cluster_count[res.labels[i]] < 2) continue;
                const double d2 = squared_distance(point_row(points, d, i),
                                                   next.row(res.labels[i]));
                if (d2 > pick_d2) {
                    pick_d2 = d2;
                    pick = i;
                }
            }
            if (pick == n) {
                throw NumericError("lloyd: cannot repair empty cluster");
            }
            const std::uint32_t old = res.labels[pick];
            const double w = point_weight(weights, pick);
            const auto row = point_row(points, d, pick);
            res.labels[pick] = static_cast<std::uint32_t>(c);
            cluster_count[old] -= 1;
            cluster_weight[old] -= w;
            cluster_count[c] = 1;
            cluster_weight[c] = w;
            for (std::size_t j = 0; j < d; ++j) {
                sums[old * d + j] -= w * row[j];
                next.values[old * d + j] = sums[old * d + j] / cluster_weight[old];
                next.values[c * d + j] = row[j];
            }
        }

        res.sse = partition_sse(points, n, d, weights, res.labels, next);
        if (iter == 1) sse0 = res.sse;
        if (res.sse > prev_sse + 1e-12 * sse0) {
            throw NumericError("lloyd: SSE increased between iterations");
        }
        prev_sse = res.sse;

        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            shift = std::max(
                shift, std::sqrt(squared_distance(res.centroids.row(c), next.row(c))));
        }
        res.centroids = std::move(next);
        if (shift <= tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

KMeansResult kmeans(std::span<const double> points, std::size_t n, std::size_t d,
                    std::span<const double> weights, const KMeansConfig& config,
                    SeededRng& rng) {
    check_inputs(points, n, d, weights, config.k);
    if (config.restarts == 0) throw DataError("kmeans: restarts must be >= 1");
    KMeansResult best;
    bool have_best = false;
    for (std::size_t r = 0; r < config.restarts; ++r) {
        SeededRng sub = rng.split("restart", r);
        CentroidSet init = kmeanspp_init(points, n, d, weights, config.k, sub);
        KMeansResult run =
            lloyd(points, n, d, weights, init, config.max_iters, config.tol);
        run.restart_index = r;
        if (!have_best || run.sse < best.sse) {
            best = std::move(run);
            have_best = true;
        }
    }
    return best;
}

AssignResult assign_nearest(const EmbeddingMatrix& data,
                            const CentroidSet& centroids, unsigned threads) {
    if (centroids.k == 0) throw DataError("assign_nearest: empty centroid set");
    if (centroids.d != data.d) {
        throw DataError("assign_nearest: centroid dimension mismatch");
    }
    AssignResult out;
    out.labels.resize(data.n);
    out.distances.resize(data.n);
    parallel_blocks(data.n, kAssignBlock, threads,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        std::vector<double> local(data.d);
                        for (std::size_t i = begin; i < end; ++i) {
                            const auto row = data.row(i);
                            for (std::size_t j = 0; j < data.d; ++j) {
                                local[j] = static_cast<double>(row[j]);
                            }
                            double d2 = 0.0;
                            out.labels[i] = nearest_centroid(local, centroids, &d2);
                            out.distances[i] = std::sqrt(d2);
                        }
                    });
    return out;
}

}  // namespace coreset
