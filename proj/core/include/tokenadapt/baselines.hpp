// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tokenadapt/ilsa.hpp"

namespace tokenadapt {

/// B visual rows drawn uniformly without replacement, ascending.
std::vector<std::size_t> baseline_random(const SequenceLayout& layout, std::size_t budget, std::uint64_t seed);

/// floor(B / C) top-scoring tokens from every view (fewer if the view is
/// smaller); the rest of the budget goes to the highest-scoring unselected
/// tokens overall, ties to the smaller row. Ascending rows.
std::vector<std::size_t> baseline_per_view_average(const ImportanceScores& s, const SequenceLayout& layout,
                                                   std::size_t budget);

/// The ILSA pipeline with importance read from the RoPE'd, causal attention
/// weights instead of the position-free scoring weights.
PruneDecision baseline_positional(const Matrix2D& h, const Matrix2D& causal_weights, const SequenceLayout& layout,
                                  const PruneConfig& cfg);

/// Pure importance ranking with no recycling: top-(K + k) rows, ascending.
std::vector<std::size_t> baseline_global_topk(const ImportanceScores& s, std::size_t budget);

}  // namespace tokenadapt
