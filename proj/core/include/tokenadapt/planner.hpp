// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "tokenadapt/matrix.hpp"
#include "tokenadapt/rng.hpp"

namespace tokenadapt {

inline constexpr std::size_t kWaypointDim = 3;  // x (forward), y (lateral), heading

struct LossWeights {
    double lateral = 2.0;
    double velocity = 0.5;
    double endpoint = 1.0;
};

struct PlannerConfig {
    std::size_t horizon = 8;  // T_r
    std::size_t query_dim = 32;
    std::size_t num_heads = 4;
    std::size_t ffn_dim = 64;
    std::size_t num_layers = 2;
    LossWeights loss;

    void validate() const;
};

/// Ego-frame waypoints, one row per future step: x [m], y [m], heading [rad].
struct Trajectory {
    Matrix2D waypoints;

    std::size_t steps() const noexcept { return waypoints.rows(); }
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct CrossAttentionLayer {
    Matrix2D wq, wk, wv, wo;  // m x m
    Matrix2D w_up;            // m x ffn
    Matrix2D w_down;          // ffn x m
    std::vector<double> query_norm_gain;
    std::vector<double> ffn_norm_gain;
};

struct PlannerWeights {
    Matrix2D queries;      // T_r x m, learnable trajectory embeddings
    Matrix2D memory_proj;  // d_model x m
    std::vector<double> memory_bias;
    std::vector<CrossAttentionLayer> layers;
    Matrix2D head;  // m x 3
    std::vector<double> head_bias;
};

PlannerWeights init_planner_weights(const PlannerConfig& cfg, std::size_t memory_dim, RngSeed seed,
                                    double stddev = 0.02);

/// Projects the memory to the query width.
Matrix2D project_memory(const Matrix2D& memory, const PlannerWeights& w);

/// One pre-norm block: x += cross_attn(norm(x), mem); x += ffn(norm(x)).
Matrix2D cross_attention_block(const Matrix2D& x, const Matrix2D& projected_memory, const CrossAttentionLayer& layer,
                               const PlannerConfig& cfg);

/// Learnable queries cross-attend to the projected memory; a linear head maps
/// each query row to one waypoint.
Trajectory decode_trajectory(const Matrix2D& memory, const PlannerConfig& cfg, const PlannerWeights& w);

/// Post-decoder refinement stage. The default passes the trajectory through.
using TrajectoryRefiner = std::function<Trajectory(const Trajectory&)>;
Trajectory identity_refiner(const Trajectory& t);

/// "t,x,y,heading" header, one row per step (t is the 0-based step index).
void write_trajectory_csv(std::ostream& out, const Trajectory& t);
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace tokenadapt
