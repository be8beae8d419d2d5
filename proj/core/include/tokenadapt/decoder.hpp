// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tokenadapt/attention.hpp"

namespace tokenadapt {

struct LayerOutput {
    Matrix2D hidden;
    /// rms_norm(h) with the attention gain: what the projections consumed.
    Matrix2D attention_input;
    std::optional<Matrix2D> scoring_weights;
    std::optional<Matrix2D> causal_weights;
};

/// Gated (SiLU) feed-forward: (silu(x Wg) * (x Wu)) Wd.
Matrix2D ffn_forward(const Matrix2D& x, const LayerWeights& w, OpCounter* counter = nullptr);

/// Pre-norm residual block: h1 = h + attn(norm(h)); out = h1 + ffn(norm(h1)).
LayerOutput decoder_layer_forward(const Matrix2D& h, const LayerWeights& w, const ArchSpec& spec,
                                  std::span<const double> positions, bool want_scoring,
                                  OpCounter* counter = nullptr);

}  // namespace tokenadapt
