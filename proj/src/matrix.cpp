#include "coreset/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "coreset/errors.hpp"

namespace coreset {

void EmbeddingMatrix::validate() const {
    if (d == 0) throw DataError("EmbeddingMatrix: dimension must be >= 1");
    if (values.size() != n * d) {
        throw DataError("EmbeddingMatrix: values size " +
                        std::to_string(values.size()) + " != n*d = " +
                        std::to_string(n * d));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw DataError("EmbeddingMatrix: non-finite value at flat index " +
                            std::to_string(i));
        }
    }
    if (!labels.empty() && labels.size() != n) {
        throw DataError("EmbeddingMatrix: labels size != n");
    }
    if (!ids.empty()) {
        if (ids.size() != n) throw DataError("EmbeddingMatrix: ids size != n");
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(ids.size());
        for (std::uint64_t id : ids) {
            if (!seen.insert(id).second) {
                throw DataError("EmbeddingMatrix: duplicate id " +
                                std::to_string(id));
            }
        }
    }
}

EmbeddingMatrix EmbeddingMatrix::take_rows(
    std::span<const std::uint64_t> indices) const {
    EmbeddingMatrix out;
    out.n = indices.size();
    out.d = d;
    out.values.resize(out.n * d);
    if (has_labels()) out.labels.resize(out.n);
    if (has_ids()) out.ids.resize(out.n);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t src = static_cast<std::size_t>(indices[i]);
        if (src >= n) {
            throw DataError("take_rows: index " + std::to_string(src) +
                            " out of bounds (n=" + std::to_string(n) + ")");
        }
        std::copy_n(values.data() + src * d, d, out.values.data() + i * d);
        if (has_labels()) out.labels[i] = labels[src];
        if (has_ids()) out.ids[i] = ids[src];
    }
    return out;
}

void IndexSubset::validate(std::size_t n) const {
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= n) {
            throw DataError("IndexSubset: index " + std::to_string(indices[i]) +
                            " out of bounds (n=" + std::to_string(n) + ")");
        }
        if (i > 0 && indices[i] <= indices[i - 1]) {
            throw DataError("IndexSubset: indices not strictly ascending at " +
                            std::to_string(i));
        }
    }
}

IndexSubset random_subset(std::size_t n, std::size_t n_c, SeededRng& rng) {
    if (n_c == 0) throw DataError("random_subset: n_c must be >= 1");
    if (n_c > n) {
        throw DataError("random_subset: n_c = " + std::to_string(n_c) +
                        " exceeds n = " + std::to_string(n));
    }
    std::vector<std::uint64_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::uint64_t{0});
    for (std::size_t i = 0; i < n_c; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(pool[i], pool[j]);
    }
    IndexSubset out;
    out.indices.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_c));
    std::sort(out.indices.begin(), out.indices.end());
    return out;
}

}  // namespace coreset
