// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tokenadapt/errors.hpp"
#include "tokenadapt/kernels.hpp"

namespace tokenadapt {

void PlannerConfig::validate() const {
    if (horizon < 2) {
        throw PreconditionError("PlannerConfig: horizon must be >= 2 for the velocity term");
    }
    if (num_heads == 0 || query_dim % num_heads != 0) {
        throw ShapeError("PlannerConfig: query_dim " + std::to_string(query_dim) + " not divisible by " +
                         std::to_string(num_heads) + " heads");
    }
}

namespace {

Matrix2D normal_matrix(std::size_t r, std::size_t c, Rng& rng, double stddev) {
    Matrix2D m(r, c);
    for (double& v : m.data()) {
        v = rng.normal(0.0, stddev);
    }
    return m;
}

}  // namespace

PlannerWeights init_planner_weights(const PlannerConfig& cfg, std::size_t memory_dim, RngSeed seed, double stddev) {
    cfg.validate();
    Rng rng = Rng(seed).split("planner");
    const std::size_t m = cfg.query_dim;
    PlannerWeights w;
    // Unit-scale queries so they are distinguishable before training.
    w.queries = normal_matrix(cfg.horizon, m, rng, 1.0);
    w.memory_proj = normal_matrix(memory_dim, m, rng, stddev);
    w.memory_bias.assign(m, 0.0);
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        CrossAttentionLayer layer;
        layer.wq = normal_matrix(m, m, rng, stddev);
        layer.wk = normal_matrix(m, m, rng, stddev);
        layer.wv = normal_matrix(m, m, rng, stddev);
        layer.wo = normal_matrix(m, m, rng, stddev);
        layer.w_up = normal_matrix(m, cfg.ffn_dim, rng, stddev);
        layer.w_down = normal_matrix(cfg.ffn_dim, m, rng, stddev);
        layer.query_norm_gain.assign(m, 1.0);
        layer.ffn_norm_gain.assign(m, 1.0);
        w.layers.push_back(std::move(layer));
    }
    w.head = normal_matrix(m, kWaypointDim, rng, stddev);
    w.head_bias.assign(kWaypointDim, 0.0);
    return w;
}

Matrix2D project_memory(const Matrix2D& memory, const PlannerWeights& w) {
    if (memory.rows() == 0) {
        throw PreconditionError("decode_trajectory: empty memory");
    }
    return add_row_bias(matmul(memory, w.memory_proj), w.memory_bias);
}

Matrix2D cross_attention_block(const Matrix2D& x, const Matrix2D& projected_memory, const CrossAttentionLayer& layer,
                               const PlannerConfig& cfg) {
    const std::size_t hd = cfg.query_dim / cfg.num_heads;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(hd));
    const Matrix2D q = matmul(rms_norm(x, layer.query_norm_gain), layer.wq);
    const Matrix2D k = matmul(projected_memory, layer.wk);
    const Matrix2D v = matmul(projected_memory, layer.wv);
    Matrix2D heads(x.rows(), cfg.query_dim);
    for (std::size_t h = 0; h < cfg.num_heads; ++h) {
        const std::size_t off = h * hd;
        const Matrix2D probs =
            softmax_rows(scale(matmul_transposed(q.col_block(off, hd), k.col_block(off, hd)), inv_sqrt_d));
        const Matrix2D oh = matmul(probs, v.col_block(off, hd));
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t c = 0; c < hd; ++c) {
                heads(r, off + c) = oh(r, c);
            }
        }
    }
    const Matrix2D x1 = add(x, matmul(heads, layer.wo));
    Matrix2D up = matmul(rms_norm(x1, layer.ffn_norm_gain), layer.w_up);
    for (double& u : up.data()) {
        u = std::max(u, 0.0);
    }
    return add(x1, matmul(up, layer.w_down));
}

Trajectory decode_trajectory(const Matrix2D& memory, const PlannerConfig& cfg, const PlannerWeights& w) {
    cfg.validate();
    if (w.queries.rows() != cfg.horizon || w.queries.cols() != cfg.query_dim) {
        throw ShapeError("decode_trajectory: queries " + w.queries.shape_string() + " for horizon " +
                         std::to_string(cfg.horizon) + " and width " + std::to_string(cfg.query_dim));
    }
    if (memory.cols() != w.memory_proj.rows()) {
        throw ShapeError("decode_trajectory: memory " + memory.shape_string() + " but projection expects " +
                         std::to_string(w.memory_proj.rows()) + " columns");
    }
    const Matrix2D mem = project_memory(memory, w);
    Matrix2D x = w.queries;
    for (const auto& layer : w.layers) {
        x = cross_attention_block(x, mem, layer, cfg);
    }
    return Trajectory{add_row_bias(matmul(x, w.head), w.head_bias)};
}

Trajectory identity_refiner(const Trajectory& t) { return t; }

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
    out << "t,x,y,heading\n";
    char buf[128];
    for (std::size_t i = 0; i < t.steps(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i, t.waypoints(i, 0), t.waypoints(i, 1),
                      t.waypoints(i, 2));
        out << buf;
    }
}

Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t,x,y,heading") {
        throw ShapeError("read_trajectory_csv: missing 't,x,y,heading' header");
    }
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string field;
        std::getline(ls, field, ',');  // step index
        for (std::size_t c = 0; c < kWaypointDim; ++c) {
            if (!std::getline(ls, field, ',')) {
                throw ShapeError("read_trajectory_csv: short row " + std::to_string(rows + 1));
            }
            values.push_back(std::stod(field));
        }
        ++rows;
    }
    return Trajectory{Matrix2D(rows, kWaypointDim, std::move(values))};
}

}  // namespace tokenadapt
