// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>

#include "tokenadapt/arch.hpp"
#include "tokenadapt/op_counter.hpp"

namespace tokenadapt {

struct AttentionResult {
    Matrix2D output;  // L x d_model
    /// Head-averaged softmax(Q_raw K_raw^T / sqrt(d)): no RoPE, no causal mask.
    std::optional<Matrix2D> scoring_weights;
    /// Head-averaged causal, RoPE'd attention probabilities of the main path.
    /// Only the materializing path has them.
    std::optional<Matrix2D> causal_weights;
};

/// Multi-head causal self-attention with RoPE on Q and K. `x` is the
/// attention-module input (already normalized by the caller).
///
/// With want_scoring the layer runs the weight-materializing path and also
/// returns the scoring matrix; otherwise it runs the streaming path, which
/// never holds more than one block of logits per query.
AttentionResult attention_forward(const Matrix2D& x, const LayerWeights& w, const ArchSpec& spec,
                                  std::span<const double> positions, bool want_scoring,
                                  OpCounter* counter = nullptr);

/// Main path that materializes the full L x L probability matrix per head.
AttentionResult attention_materialized(const Matrix2D& x, const LayerWeights& w, const ArchSpec& spec,
                                       std::span<const double> positions, OpCounter* counter = nullptr);

/// Main path with block-wise online softmax; returns output only.
Matrix2D attention_streaming(const Matrix2D& x, const LayerWeights& w, const ArchSpec& spec,
                             std::span<const double> positions, OpCounter* counter = nullptr);

/// RoPE-free, mask-free, head-averaged scoring matrix.
Matrix2D scoring_weights(const Matrix2D& x, const LayerWeights& w, const ArchSpec& spec,
                         OpCounter* counter = nullptr);

/// Splits an L x (heads*head_dim) matrix into [head, pos, head_dim].
Matrix3D split_heads(const Matrix2D& m, std::size_t heads, std::size_t head_dim);
Matrix2D merge_heads(const Matrix3D& m);

}  // namespace tokenadapt
