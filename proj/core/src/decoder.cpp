// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/decoder.hpp"

namespace tokenadapt {

Matrix2D ffn_forward(const Matrix2D& x, const LayerWeights& w, OpCounter* counter) {
    Matrix2D gate = matmul(x, w.w_gate);
    const Matrix2D up = matmul(x, w.w_up);
    for (std::size_t i = 0; i < gate.size(); ++i) {
        gate.data()[i] = silu(gate.data()[i]) * up.data()[i];
    }
    if (counter != nullptr) {
        const auto rows = static_cast<std::uint64_t>(x.rows());
        counter->ffn_macs += rows * x.cols() * w.w_gate.cols() * 2 + rows * w.w_down.rows() * w.w_down.cols();
    }
    return matmul(gate, w.w_down);
}

LayerOutput decoder_layer_forward(const Matrix2D& h, const LayerWeights& w, const ArchSpec& spec,
                                  std::span<const double> positions, bool want_scoring, OpCounter* counter) {
    LayerOutput out;
    out.attention_input = rms_norm(h, w.attn_norm_gain);
    AttentionResult attn = attention_forward(out.attention_input, w, spec, positions, want_scoring, counter);
    Matrix2D h1 = add(h, attn.output);
    out.hidden = add(h1, ffn_forward(rms_norm(h1, w.ffn_norm_gain), w, counter));
    out.scoring_weights = std::move(attn.scoring_weights);
    out.causal_weights = std::move(attn.causal_weights);
    return out;
}

}  // namespace tokenadapt
