#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coreset/rng.hpp"

namespace coreset {

// Row-major n x d float matrix with optional per-row integer labels and
// optional unique 64-bit sample ids. Immutable by convention once built;
// safe to share across threads.
struct EmbeddingMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<float> values;          // n * d, row-major
    std::vector<std::uint32_t> labels;  // empty or size n
    std::vector<std::uint64_t> ids;     // empty or size n, unique

    bool has_labels() const { return !labels.empty(); }
    bool has_ids() const { return !ids.empty(); }

    std::span<const float> row(std::size_t i) const {
        return {values.data() + i * d, d};
    }
    std::span<float> row(std::size_t i) {
        return {values.data() + i * d, d};
    }

    // Throws DataError if any invariant is broken: values size, finiteness,
    // label/id lengths, id uniqueness, d >= 1.
    void validate() const;

    // Copy of the rows named by `indices` (labels/ids carried along).
    EmbeddingMatrix take_rows(std::span<const std::uint64_t> indices) const;
};

// Sorted, unique, in-bounds row indices into some matrix.
struct IndexSubset {
    std::vector<std::uint64_t> indices;

    std::size_t size() const { return indices.size(); }

    // Throws DataError unless indices are strictly ascending and < n.
    void validate(std::size_t n) const;
};

// n_c distinct indices drawn uniformly without replacement from [0, n)
// via a Fisher-Yates partial shuffle, returned sorted ascending.
// Throws DataError if n_c = 0 or n_c > n.
IndexSubset random_subset(std::size_t n, std::size_t n_c, SeededRng& rng);

}  // namespace coreset
