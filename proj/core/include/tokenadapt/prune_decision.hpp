// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace tokenadapt {

/// Outcome of one sparsification step. Index sets are sorted row indices into
/// the sequence as it entered the sparse layer and reference visual rows only.
struct PruneDecision {
    std::vector<std::size_t> global;   // top-K by importance
    std::vector<std::size_t> recycle;  // top-k by diversity among the rest
    std::vector<std::size_t> final;    // global U recycle
    std::size_t budget = 0;            // B
    std::size_t top_k = 0;             // K
    std::size_t recycle_k = 0;         // k (after clamping to the complement size)

    /// Text anchors selected at this layer (row indices).
    std::vector<std::size_t> anchors;
    double anchor_threshold = 0.0;
    /// Importance score per visual row, aligned with SequenceLayout::visual_indices().
    std::vector<double> importance;
    /// Rows of the non-selected visual tokens and their diversity scores.
    std::vector<std::size_t> candidates;
    std::vector<double> diversity;

    friend bool operator==(const PruneDecision&, const PruneDecision&) = default;
};

}  // namespace tokenadapt
