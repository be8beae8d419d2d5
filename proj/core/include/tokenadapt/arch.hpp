// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tokenadapt/kernels.hpp"
#include "tokenadapt/matrix.hpp"
#include "tokenadapt/rng.hpp"

namespace tokenadapt {

/// Decoder dimensions. Inputs are embeddings (no vocabulary).
struct ArchSpec {
    std::size_t num_layers = 8;
    std::size_t d_model = 64;
    std::size_t num_heads = 4;
    std::size_t head_dim = 16;
    std::size_t ffn_dim = 128;
    double rope_theta = kDefaultRopeTheta;
    /// Layers that run the weight-materializing attention path and invoke the sparsifier.
    std::vector<std::size_t> sparse_layers;
    bool vocabless = true;

    /// Throws ShapeError / PreconditionError when the invariants do not hold.
    void validate() const;
    bool is_sparse_layer(std::size_t layer) const;
};

/// Projections use row-vector convention: y = x * W.
struct LayerWeights {
    Matrix2D wq, wk, wv, wo;     // d_model x d_model
    Matrix2D w_gate, w_up;       // d_model x ffn_dim
    Matrix2D w_down;             // ffn_dim x d_model
    std::vector<double> attn_norm_gain;
    std::vector<double> ffn_norm_gain;

    void validate(const ArchSpec& spec) const;
};

struct WeightInit {
    double stddev = 0.02;
    /// Added on the diagonal of W_Q and W_K. Zero gives the plain scaled-normal init.
    double qk_identity_gain = 0.0;
};

LayerWeights init_layer_weights(const ArchSpec& spec, Rng rng, const WeightInit& init = {});
std::vector<LayerWeights> init_model_weights(const ArchSpec& spec, RngSeed seed, const WeightInit& init = {});
/// All matrices zero, gains one.
LayerWeights zero_layer_weights(const ArchSpec& spec);

enum class Modality : std::uint8_t { visual, text, other };

std::string to_string(Modality m);

struct TokenInfo {
    Modality modality = Modality::other;
    std::optional<std::size_t> view_id;
    std::optional<std::size_t> frame_id;
    std::size_t original_position = 0;

    friend bool operator==(const TokenInfo&, const TokenInfo&) = default;
};

/// Per-token structural metadata, aligned with the rows of the hidden states.
class SequenceLayout {
public:
    SequenceLayout() = default;
    explicit SequenceLayout(std::vector<TokenInfo> tokens);

    std::size_t size() const noexcept { return tokens_.size(); }
    const TokenInfo& operator[](std::size_t i) const noexcept { return tokens_[i]; }
    std::span<const TokenInfo> tokens() const noexcept { return tokens_; }

    std::vector<std::size_t> visual_indices() const;
    std::vector<std::size_t> text_indices() const;
    std::vector<std::size_t> non_visual_indices() const;
    std::size_t visual_count() const;
    /// One more than the largest view id among visual tokens (0 if none).
    std::size_t num_views() const;

    /// RoPE positions (original_position as double).
    std::vector<double> positions() const;
    /// Copy keeping rows `indices` (must be increasing).
    SequenceLayout select(std::span<const std::size_t> indices) const;
    /// Copy with `offset` added to every token whose modality is `which`.
    SequenceLayout shifted(std::size_t offset, std::optional<Modality> which = std::nullopt) const;

    /// Throws PreconditionError when positions are not strictly increasing or
    /// a visual token lacks a view id / a text token carries one.
    void validate() const;

    friend bool operator==(const SequenceLayout&, const SequenceLayout&) = default;

private:
    std::vector<TokenInfo> tokens_;
};

}  // namespace tokenadapt
