#pragma once

#include <cstdint>
#include <vector>

#include "coreset/matrix.hpp"

namespace coreset {

// Where, when and how a Selection was produced. epoch = 0 means standalone
// (not tied to a training run); config_hash = 0 means no config involved.
struct SelectionProvenance {
    std::uint64_t epoch = 0;
    double rho = 1.0;
    double eta = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t source_hash = 0;
    std::uint64_t config_hash = 0;
    std::vector<std::uint64_t> cluster_sizes;
    std::vector<std::uint64_t> quotas;
};

// Retained dataset indices plus provenance; the pruner's output and the
// trainer's input.
struct Selection {
    IndexSubset indices;
    SelectionProvenance provenance;

    std::size_t size() const { return indices.size(); }
};

}  // namespace coreset
