// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tokenadapt/arch.hpp"
#include "tokenadapt/ilsa.hpp"

namespace tokenadapt {

/// Reference dense GFLOPs the frontend constant is calibrated against.
inline constexpr double kReferenceDenseFlops = 9105e9;

// Non-matmul costs, in FLOPs per element touched.
inline constexpr double kSoftmaxFlopsPerScore = 5.0;   // max, subtract, exp, sum, divide
inline constexpr double kRmsNormFlopsPerElement = 4.0; // square, accumulate, scale, gain
inline constexpr double kRopeFlopsPerElement = 3.0;    // two multiplies and an add, on q and k
inline constexpr double kGateFlopsPerElement = 5.0;    // silu plus the gating multiply
inline constexpr double kResidualFlopsPerElement = 1.0;

struct FlopsArchAssumptions {
    std::size_t num_layers = 32;
    std::size_t d_model = 4096;
    std::size_t num_heads = 32;
    std::size_t ffn_dim = 11008;

    std::size_t views = 6;
    /// Encoder-side patch tokens per view and frame.
    std::size_t encoder_tokens_per_view = 576;
    /// Visual tokens that reach the LLM, summed over views.
    std::size_t llm_visual_tokens = 576;
    std::size_t text_tokens = 64;
    std::size_t other_tokens = 0;

    std::size_t history_frames = 2;
    std::size_t tfm_dim = 1024;
    std::size_t tfm_ffn_dim = 4096;
    std::size_t tfm_layers = 1;

    /// Vision encoder + TFM + adapter, never pruned. When unset the analytic
    /// TFM + adapter estimate is used.
    std::optional<double> frontend_flops;

    std::size_t sequence_length() const noexcept { return llm_visual_tokens + text_tokens + other_tokens; }
    std::size_t non_visual_tokens() const noexcept { return text_tokens + other_tokens; }
    void validate() const;
};

/// 7B decoder (32 x 4096, 32 heads, ffn 11008) with the frontend calibrated
/// so the dense total equals kReferenceDenseFlops at the default text length.
FlopsArchAssumptions reference_7b_assumptions();

/// Desk-scale assumptions matching a model_forward run (no frontend).
FlopsArchAssumptions assumptions_for(const ArchSpec& spec, const SequenceLayout& layout);

/// Multiply-accumulate counts of one decoder layer at a given length.
struct LayerMacs {
    std::uint64_t projection = 0;  // Q, K, V, O
    std::uint64_t score = 0;       // QK^T over the full L x L tile
    std::uint64_t value = 0;       // PV
    std::uint64_t ffn = 0;         // gate, up, down
    std::uint64_t scoring = 0;     // RoPE-free scoring logits (sparse layers)
    std::uint64_t anchor = 0;      // visual-text similarity for anchor selection (sparse layers)

    std::uint64_t total() const noexcept { return projection + score + value + ffn + scoring + anchor; }
    friend bool operator==(const LayerMacs&, const LayerMacs&) = default;
};

struct LayerFlops {
    std::size_t layer = 0;
    std::size_t length = 0;
    std::size_t visual = 0;
    bool sparse = false;
    LayerMacs macs;
    double projection_flops = 0.0;
    double attention_flops = 0.0;  // score + value matmuls and softmax
    double ffn_flops = 0.0;        // matmuls and gating
    double elementwise_flops = 0.0;// norms, RoPE, residual adds
    double eager_overhead_flops = 0.0;

    double total() const noexcept {
        return projection_flops + attention_flops + ffn_flops + elementwise_flops + eager_overhead_flops;
    }
};

struct FlopsReport {
    std::vector<LayerFlops> layers;
    double llm_flops = 0.0;  // sum over layers, eager overhead included
    double eager_overhead_flops = 0.0;
    double frontend_flops = 0.0;
    double frontend_analytic_flops = 0.0;  // TFM + adapter
    double tfm_flops = 0.0;
    double adapter_flops = 0.0;
    double total_flops = 0.0;

    double attention_flops() const noexcept;
    double ffn_flops() const noexcept;
    LayerMacs total_macs() const noexcept;
};

/// Decoder-layer MACs at length L with the given visual/text split.
LayerMacs layer_macs(const FlopsArchAssumptions& a, std::size_t length, bool sparse, std::size_t visual,
                     std::size_t text);

double tfm_flops(const FlopsArchAssumptions& a);
double adapter_flops(const FlopsArchAssumptions& a);

FlopsReport dense_flops(const FlopsArchAssumptions& a);

/// Layers before the first sparse layer run at full length; each sparse layer
/// runs at its entry length plus the eager scoring overhead, then the visual
/// count drops to the budget computed from the count entering that layer.
FlopsReport pruned_flops(const FlopsArchAssumptions& a, const PruneConfig& cfg);

/// pruned.total / dense.total.
double reduction_ratio(const FlopsReport& dense, const FlopsReport& pruned);

/// Sets frontend_flops so the dense total equals `target`. Throws
/// PreconditionError when the LLM alone already exceeds it.
FlopsArchAssumptions calibrate_frontend(FlopsArchAssumptions a, double target);

}  // namespace tokenadapt

namespace tokenadapt {

struct TextSensitivityRow {
    std::size_t text_tokens = 0;
    double dense_flops = 0.0;
    double pruned_flops = 0.0;
    double ratio = 1.0;
};

struct SweepRow {
    std::size_t sparse_layer = 0;
    double pruning_rate = 0.0;
    double pruned_flops = 0.0;
    double ratio = 1.0;
};

/// Dense vs pruned at one setting, plus a text-length sensitivity table and a
/// sparse-layer x pruning-rate sweep (single sparse layer each).
struct FlopsStudy {
    FlopsArchAssumptions assumptions;
    PruneConfig prune;
    FlopsReport dense;
    FlopsReport pruned;
    double ratio = 1.0;
    std::vector<TextSensitivityRow> text_sensitivity;
    std::vector<SweepRow> sweep;
};

FlopsStudy flops_study(const FlopsArchAssumptions& a, const PruneConfig& cfg,
                       const std::vector<std::size_t>& text_counts = {32, 48, 64, 96, 128},
                       const std::vector<std::size_t>& sweep_layers = {2, 4, 8},
                       const std::vector<double>& sweep_rates = {0.35, 0.6, 0.85});

std::string flops_study_json(const FlopsStudy& s);
/// section,key,dense_gflops,pruned_gflops,ratio
std::string flops_study_csv(const FlopsStudy& s);

}  // namespace tokenadapt
