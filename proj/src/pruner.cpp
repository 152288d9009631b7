#include "coreset/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coreset/errors.hpp"
#include "coreset/hierarchy.hpp"
#include "coreset/io.hpp"
#include "coreset/kmeans.hpp"

namespace coreset {

void PruneConfig::validate(std::size_t n) const {
    if (n_c == 0) throw DataError("prune: n_c must be >= 1");
    if (n_c > n) {
        throw DataError("prune: n_c = " + std::to_string(n_c) +
                        " exceeds dataset size " + std::to_string(n));
    }
    if (ks.empty()) throw DataError("prune: ks must not be empty");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] == 0) throw DataError("prune: every k must be >= 1");
        if (i > 0 && ks[i] > ks[i - 1]) {
            throw DataError("prune: ks must be non-increasing");
        }
    }
    if (ks[0] > n_c) throw DataError("prune: k_1 exceeds n_c");
    if (!(rho > 0.0) || rho > 1.0) throw DataError("prune: rho must be in (0,1]");
    if (!(eta >= 0.0) || eta > 1.0) throw DataError("prune: eta must be in [0,1]");
    if (!(sharpness > 0.0)) throw DataError("prune: sharpness must be > 0");
}

std::vector<std::uint64_t> quota_allocate(const std::vector<std::uint64_t>& sizes,
                                          std::uint64_t target) {
    std::uint64_t total = 0;
    for (std::uint64_t s : sizes) total += s;
    if (target > total) {
        throw DataError("quota_allocate: target " + std::to_string(target) +
                        " exceeds total size " + std::to_string(total));
    }

    // Largest cap whose capped sum still fits in target.
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    for (std::uint64_t s : sizes) hi = std::max(hi, s);
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo + 1) / 2;
        std::uint64_t capped = 0;
        for (std::uint64_t s : sizes) capped += std::min(s, mid);
        if (capped <= target) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    const std::uint64_t cap = lo;

    std::vector<std::uint64_t> quotas(sizes.size());
    std::uint64_t used = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        quotas[i] = std::min(sizes[i], cap);
        used += quotas[i];
    }

    std::uint64_t leftover = target - used;
    if (leftover > 0) {
        // +1 each to the largest clusters still above the cap, ties -> lowest
        // index.  leftover < number of such clusters by choice of cap.
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            if (sizes[i] > cap) order.push_back(i);
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
            return a < b;
        });
        for (std::size_t j = 0; j < order.size() && leftover > 0; ++j, --leftover) {
            quotas[order[j]] += 1;
        }
    }
    return quotas;
}

std::vector<std::uint64_t> sample_within_cluster(std::vector<RankedMember> members,
                                                 std::size_t q, double eta,
                                                 SampleMode mode, double sharpness,
                                                 SeededRng& rng) {
    const std::size_t m = members.size();
    if (q > m) {
        throw DataError("sample_within_cluster: q = " + std::to_string(q) +
                        " exceeds cluster size " + std::to_string(m));
    }
    if (q == 0) return {};

    std::stable_sort(members.begin(), members.end(),
                     [](const RankedMember& a, const RankedMember& b) {
                         if (a.distance != b.distance) return a.distance < b.distance;
                         return a.index < b.index;
                     });

    std::vector<std::uint64_t> out;
    out.reserve(q);
    if (mode == SampleMode::deterministic_band) {
        const std::size_t start =
            static_cast<std::size_t>(std::floor(eta * static_cast<double>(m - q)));
        for (std::size_t r = start; r < start + q; ++r) out.push_back(members[r].index);
    } else {
        // Exponential race: key_i = ln(E_i) - l_i with E_i ~ Exp(1); the q
        // smallest keys are a without-replacement sample with weight e^{l_i}.
        struct Keyed {
            double key;
            std::size_t rank;
        };
        std::vector<Keyed> keys(m);
        for (std::size_t r = 0; r < m; ++r) {
            const double rnorm =
                m > 1 ? static_cast<double>(r) / static_cast<double>(m - 1) : 0.0;
            const double logw = sharpness * (1.0 - 2.0 * eta) * (1.0 - rnorm);
            const double u = 1.0 - rng.next_double();  // (0,1]
            keys[r] = {std::log(-std::log(u)) - logw, r};
        }
        std::sort(keys.begin(), keys.end(), [&](const Keyed& a, const Keyed& b) {
            if (a.key != b.key) return a.key < b.key;
            return members[a.rank].index < members[b.rank].index;
        });
        for (std::size_t j = 0; j < q; ++j) out.push_back(members[keys[j].rank].index);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

EmbeddingMatrix normalized_rows(const EmbeddingMatrix& features) {
    EmbeddingMatrix out = features;
    for (std::size_t i = 0; i < out.n; ++i) {
        double norm2 = 0.0;
        const auto row = out.row(i);
        for (float v : row) norm2 += static_cast<double>(v) * v;
        if (norm2 <= 0.0) continue;  // zero rows stay zero
        const double inv = 1.0 / std::sqrt(norm2);
        float* p = out.values.data() + i * out.d;
        for (std::size_t j = 0; j < out.d; ++j) {
            p[j] = static_cast<float>(p[j] * inv);
        }
    }
    return out;
}

}  // namespace

Selection prune(const EmbeddingMatrix& features, const PruneConfig& config) {
    features.validate();
    config.validate(features.n);
    const std::size_t n = features.n;

    SeededRng root(config.seed);
    const EmbeddingMatrix* working = &features;
    EmbeddingMatrix normalized;
    if (config.normalize) {
        normalized = normalized_rows(features);
        working = &normalized;
    }

    SeededRng subset_rng = root.split("subset");
    IndexSubset subset_rows = random_subset(n, config.n_c, subset_rng);
    EmbeddingMatrix subset = working->take_rows(subset_rows.indices);

    HierarchyParams hp;
    hp.ks = config.ks;
    hp.tol = config.tol;
    hp.max_iters = config.max_iters;
    hp.restarts = config.restarts;
    hp.mass_weighted = config.mass_weighted;
    SeededRng hk_rng = root.split("hkmeans");
    ClusterModel model = hkmeans(subset, hp, hk_rng);
    const CentroidSet& centroids = final_level(model);

    AssignResult assigned = assign_nearest(*working, centroids, config.threads);

    const std::uint64_t target =
        static_cast<std::uint64_t>(std::llround(config.rho * static_cast<double>(n)));
    std::vector<std::uint64_t> sizes(centroids.k, 0);
    for (std::uint32_t c : assigned.labels) sizes[c] += 1;
    std::vector<std::uint64_t> quotas = quota_allocate(sizes, target);

    std::vector<std::vector<RankedMember>> buckets(centroids.k);
    for (std::size_t c = 0; c < centroids.k; ++c) buckets[c].reserve(sizes[c]);
    for (std::size_t i = 0; i < n; ++i) {
        buckets[assigned.labels[i]].push_back(
            {static_cast<std::uint64_t>(i), assigned.distances[i]});
    }

    Selection sel;
    sel.indices.indices.reserve(target);
    for (std::size_t c = 0; c < centroids.k; ++c) {
        SeededRng cluster_rng = root.split("cluster", c);
        std::vector<std::uint64_t> picked =
            sample_within_cluster(std::move(buckets[c]), quotas[c], config.eta,
                                  config.mode, config.sharpness, cluster_rng);
        sel.indices.indices.insert(sel.indices.indices.end(), picked.begin(),
                                   picked.end());
    }
    std::sort(sel.indices.indices.begin(), sel.indices.indices.end());
    sel.indices.validate(n);

    sel.provenance.rho = config.rho;
    sel.provenance.eta = config.eta;
    sel.provenance.seed = config.seed;
    sel.provenance.source_hash = matrix_content_hash(features);
    sel.provenance.cluster_sizes = sizes;
    sel.provenance.quotas = quotas;
    return sel;
}

}  // namespace coreset
