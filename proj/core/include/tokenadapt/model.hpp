// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "tokenadapt/decoder.hpp"
#include "tokenadapt/prune_decision.hpp"

namespace tokenadapt {

/// Everything a sparsifier sees at a sparse layer. References stay valid only
/// for the duration of the call.
struct SparsifyRequest {
    std::size_t layer;
    const Matrix2D& layer_input;      // residual stream entering the layer
    const Matrix2D& attention_input;  // normalized H the projections consumed
    const Matrix2D& scoring_weights;  // RoPE-free, mask-free
    const Matrix2D& causal_weights;   // RoPE'd, causal (main path)
    const Matrix2D& layer_output;
    const SequenceLayout& layout;
};

using Sparsifier = std::function<PruneDecision(const SparsifyRequest&)>;

struct PruneTraceEntry {
    std::size_t layer = 0;
    std::size_t length_before = 0;
    std::size_t length_after = 0;
    PruneDecision decision;
    /// The layout the decision's indices refer to.
    SequenceLayout layout;
};

using PruneTrace = std::vector<PruneTraceEntry>;

struct ModelOutput {
    Matrix2D hidden;
    SequenceLayout layout;
    PruneTrace trace;
};

/// Runs every layer. At each sparse layer the scoring weights are requested,
/// the sparsifier is invoked, and the layer output is compacted to
/// decision.final plus all non-visual rows (original order kept). Retained
/// tokens keep their original positions for RoPE. Without a sparsifier the
/// sparse layers still use the materializing path but nothing is pruned.
ModelOutput model_forward(const Matrix2D& embeddings, const SequenceLayout& layout, const ArchSpec& spec,
                          const std::vector<LayerWeights>& weights, const Sparsifier& sparsifier = {},
                          OpCounter* counter = nullptr);

/// Rows kept after a decision: decision.final U non-visual rows, ascending.
/// Throws ContractViolation on out-of-range, duplicate or non-visual indices.
std::vector<std::size_t> retained_rows(const PruneDecision& decision, const SequenceLayout& layout);

}  // namespace tokenadapt
