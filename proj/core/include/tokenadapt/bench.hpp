// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tokenadapt/config.hpp"
#include "tokenadapt/flops.hpp"
#include "tokenadapt/loss.hpp"
#include "tokenadapt/metrics.hpp"
#include "tokenadapt/model.hpp"
#include "tokenadapt/op_counter.hpp"
#include "tokenadapt/scenario.hpp"

namespace tokenadapt {

inline constexpr std::array<const char*, 5> kStrategyNames = {"ilsa", "random", "per_view_average", "positional",
                                                              "global_topk"};

/// All weights of one run, derived from Config::weight_seed.
struct ModelBundle {
    std::vector<LayerWeights> decoder;
    TfmWeights tfm;
    AdapterWeights adapter;
    PlannerWeights planner;
};

ModelBundle build_model(const Config& cfg);

/// State at the first sparse layer: the normalized attention input H, both
/// attention maps, and the layout they index.
struct SparseLayerCapture {
    std::size_t layer = 0;
    Matrix2D attention_input;
    Matrix2D scoring_weights;
    Matrix2D causal_weights;
    SequenceLayout layout;
};

/// Runs the decoder up to and including the first sparse layer.
SparseLayerCapture capture_first_sparse_layer(const Matrix2D& embeddings, const SequenceLayout& layout,
                                              const ArchSpec& spec, const std::vector<LayerWeights>& weights);

struct StrategyResult {
    std::string name;
    std::vector<std::size_t> retained;  // ascending rows
    double recall = 0.0;
    double coverage = 0.0;
    double diversity = 0.0;
    std::optional<PruneDecision> decision;  // ilsa and positional only
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::vector<std::size_t> planted_rows;
    std::vector<StrategyResult> strategies;  // kStrategyNames order
};

struct StrategySummary {
    std::string name;
    MeanStd recall;
    MeanStd coverage;
    MeanStd diversity;
};

struct BenchReport {
    Config config;
    std::vector<SeedResult> seeds;
    std::vector<StrategySummary> summary;
    /// Desk-scale analytic FLOPs for the configured sequence.
    FlopsReport dense;
    FlopsReport pruned;
    double flops_ratio = 1.0;
};

/// Generates the scenario for `seed`, runs to the sparse layer, and applies
/// every strategy at the same budget.
SeedResult run_seed(const Config& cfg, const ModelBundle& model, std::uint64_t seed);

/// Seeds base_seed .. base_seed + seeds - 1, optionally on several threads;
/// results are merged in seed order.
BenchReport run_bench(const Config& cfg);

std::string bench_report_json(const BenchReport& r);
/// strategy,metric,mean,std
std::string bench_summary_csv(const BenchReport& r);
/// seed,strategy,recall,coverage,diversity,retained
std::string bench_seeds_csv(const BenchReport& r);

/// Writes report.json, summary.csv and per_seed.csv into `dir`.
void write_bench_reports(const BenchReport& r, const std::filesystem::path& dir);

struct ForwardResult {
    Scenario scenario;
    ModelOutput output;
    Trajectory trajectory;
    LossParts loss;
    OpCounter counter;
};

/// One scenario through TFM, adapter, the pruned decoder and the planner.
ForwardResult run_forward(const Config& cfg, std::uint64_t seed, const TrajectoryRefiner& refiner = identity_refiner);

std::string forward_report_json(const Config& cfg, const ForwardResult& r);

}  // namespace tokenadapt
