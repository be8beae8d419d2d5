// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "tokenadapt/arch.hpp"

namespace tokenadapt {

inline constexpr double kTimeWeightEps = 1e-8;
inline constexpr std::size_t kDefaultHistoryFrames = 2;

struct ViewSpan {
    std::size_t view_id = 0;
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    friend bool operator==(const ViewSpan&, const ViewSpan&) = default;
};

/// Per-frame visual features, oldest frame first: frames(t, token, dim) with
/// t in [0, n]. Tokens of all views are concatenated along the token axis.
struct FrameFeatures {
    Matrix3D frames;
    std::vector<ViewSpan> views;

    std::size_t history() const noexcept { return frames.dim0() == 0 ? 0 : frames.dim0() - 1; }
    std::size_t tokens() const noexcept { return frames.dim1(); }
    std::size_t dim() const noexcept { return frames.dim2(); }

    /// View spans must partition [0, tokens()).
    void validate() const;
};

/// Encoder shape. Reuses the decoder block layout (gated FFN, RMSNorm) but the
/// attention is bidirectional and position-free.
struct TfmSpec {
    std::size_t dim = 64;
    std::size_t num_heads = 4;
    std::size_t ffn_dim = 128;
    std::size_t num_layers = 1;

    ArchSpec as_arch() const;
};

struct TfmWeights {
    Matrix2D time_embedding;  // (n+1) x dim
    std::vector<LayerWeights> encoder;
    std::vector<double> time_weights;  // n+1
};

TfmWeights init_tfm_weights(const TfmSpec& spec, std::size_t history, RngSeed seed, double stddev = 0.02);

/// V~_t = V_t + E(t), broadcast over tokens.
FrameFeatures add_time_embedding(const FrameFeatures& f, const Matrix2D& time_embedding);

/// One bidirectional pre-norm block over a (time x dim) sequence.
Matrix2D temporal_block_forward(const Matrix2D& x, const LayerWeights& w, const TfmSpec& spec);

/// Runs the encoder stack independently for every token position, attending
/// over the n+1 time steps of that position only.
FrameFeatures temporal_encode(const FrameFeatures& f, const TfmWeights& w, const TfmSpec& spec);

/// sum_i w_i V_i / sum_i w_i per token. Throws DegenerateWeightsError when
/// |sum w| <= kTimeWeightEps.
Matrix2D time_weighted_aggregate(const FrameFeatures& seq, std::span<const double> weights);

/// add_time_embedding -> temporal_encode -> time_weighted_aggregate. Returns T x dim.
Matrix2D tfm_forward(const FrameFeatures& f, const TfmWeights& w, const TfmSpec& spec);

/// Single affine map from the fused feature dim to the decoder hidden dim.
struct AdapterWeights {
    Matrix2D weight;  // in_dim x out_dim
    std::vector<double> bias;
};

/// Identity when in_dim == out_dim, scaled normal otherwise; zero bias.
AdapterWeights init_adapter(std::size_t in_dim, std::size_t out_dim, RngSeed seed, double stddev = 0.02);
Matrix2D adapter_project(const Matrix2D& fused, const AdapterWeights& adapter);

}  // namespace tokenadapt
