// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tokenadapt/planner.hpp"
#include "tokenadapt/temporal_fusion.hpp"

namespace tokenadapt {

/// Camera order used for view indices 0..5.
inline constexpr std::array<const char*, 6> kViewNames = {"Front",      "Front Left", "Rear Left",
                                                         "Front Right", "Rear Right", "Rear"};

std::string view_name(std::size_t view_id);

/// Synthetic multi-view driving scene. Background tokens are isotropic noise;
/// planted tokens add `alignment_strength` times a hidden unit direction
/// (scaled to the feature norm), and the first `anchor_text_tokens` text tokens
/// point along that same direction. Every visual token also carries a shared
/// modality offset that the remaining (filler) text tokens carry with the
/// opposite sign, so filler text scores low against the image.
struct ScenarioParams {
    std::size_t views = 6;
    std::size_t tokens_per_view = 64;
    std::size_t history_frames = kDefaultHistoryFrames;
    std::size_t text_tokens = 8;
    std::size_t anchor_text_tokens = 2;
    /// Planted count per view; size must equal `views`.
    std::vector<std::size_t> planted_per_view = {8, 4, 2, 4, 2, 2};
    double alignment_strength = 2.0;
    double noise_scale = 1.0;
    /// Per-frame jitter around each token's base feature.
    double temporal_noise = 0.1;
    /// Noise mixed into the anchor text tokens.
    double text_noise = 0.5;
    /// Length of the shared visual offset, in units of the feature norm.
    double modality_gap = 1.0;
    /// One non-visual separator token ahead of every view block.
    bool separators = true;
    std::size_t feature_dim = 64;
    std::size_t horizon = 8;

    void validate() const;
};

struct Scenario {
    std::uint64_t seed = 0;
    ScenarioParams params;
    /// Planted token offsets within each view, ascending.
    std::vector<std::vector<std::size_t>> planted;
    /// Both norm sqrt(feature_dim).
    std::vector<double> anchor_direction;
    std::vector<double> modality_direction;
    FrameFeatures frames;
    Matrix2D text;        // text_tokens x feature_dim
    Matrix2D separators;  // views x feature_dim (empty without separators)
    /// Decoder input order: [sep, view 0 tokens], ..., [sep, view C-1 tokens], text.
    SequenceLayout layout;
    /// Sequence rows of the planted tokens, ascending.
    std::vector<std::size_t> planted_rows;
    Trajectory ground_truth;
};

Scenario generate_scenario(std::uint64_t seed, const ScenarioParams& params);

/// Fuses the frames with the TFM, maps every token through the adapter, and
/// lays the rows out in `s.layout` order.
Matrix2D assemble_embeddings(const Scenario& s, const TfmSpec& tfm, const TfmWeights& tfm_weights,
                             const AdapterWeights& adapter);

}  // namespace tokenadapt
