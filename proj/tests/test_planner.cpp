// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "tokenadapt/errors.hpp"
#include "tokenadapt/loss.hpp"
#include "tokenadapt/planner.hpp"

using namespace tokenadapt;

namespace {

PlannerConfig small_planner() {
    PlannerConfig cfg;
    cfg.horizon = 5;
    cfg.query_dim = 8;
    cfg.num_heads = 2;
    cfg.ffn_dim = 12;
    cfg.num_layers = 2;
    return cfg;
}

Matrix2D relu(Matrix2D m) {
    for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
    return m;
}

// Loop form of one pre-norm cross-attention block with a ReLU FFN.
Matrix2D block_oracle(const Matrix2D& x, const Matrix2D& mem, const CrossAttentionLayer& l, std::size_t heads) {
    const std::size_t m = x.cols();
    const std::size_t hd = m / heads;
    const Matrix2D q = oracle::matmul(oracle::rms_norm(x, l.query_norm_gain), l.wq);
    const Matrix2D k = oracle::matmul(mem, l.wk);
    const Matrix2D v = oracle::matmul(mem, l.wv);
    Matrix2D att(x.rows(), m);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::vector<double> logits(mem.rows());
            for (std::size_t j = 0; j < mem.rows(); ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < hd; ++c) s += q(i, h * hd + c) * k(j, h * hd + c);
                logits[j] = s / std::sqrt(static_cast<double>(hd));
            }
            const auto p = oracle::softmax(logits);
            for (std::size_t c = 0; c < hd; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < mem.rows(); ++j) acc += p[j] * v(j, h * hd + c);
                att(i, h * hd + c) = acc;
            }
        }
    }
    const Matrix2D x1 = oracle::plus(x, oracle::matmul(att, l.wo));
    const Matrix2D up = relu(oracle::matmul(oracle::rms_norm(x1, l.ffn_norm_gain), l.w_up));
    return oracle::plus(x1, oracle::matmul(up, l.w_down));
}

Trajectory traj(Matrix2D m) { return Trajectory{std::move(m)}; }

}  // namespace

TEST(Planner, ConfigValidation) {
    PlannerConfig cfg = small_planner();
    cfg.horizon = 1;
    EXPECT_THROW(cfg.validate(), PreconditionError);
    cfg = small_planner();
    cfg.num_heads = 3;
    EXPECT_THROW(cfg.validate(), ShapeError);
}

TEST(Planner, OutputShapeAndDeterminism) {
    const PlannerConfig cfg = small_planner();
    const PlannerWeights w = init_planner_weights(cfg, 6, RngSeed{3}, 0.2);
    Rng rng(RngSeed{4});
    const Matrix2D mem = oracle::random_matrix(rng, 9, 6);
    const Trajectory t = decode_trajectory(mem, cfg, w);
    EXPECT_EQ(t.steps(), 5u);
    EXPECT_EQ(t.waypoints.cols(), kWaypointDim);
    EXPECT_EQ(decode_trajectory(mem, cfg, init_planner_weights(cfg, 6, RngSeed{3}, 0.2)), t);
    EXPECT_THROW(decode_trajectory(Matrix2D(0, 6), cfg, w), PreconditionError);
    EXPECT_THROW(decode_trajectory(Matrix2D(3, 5), cfg, w), ShapeError);
}

TEST(Planner, SingletonMemoryAttendsWithWeightOne) {
    // With one memory token every query gets that token's value regardless of Wq, Wk.
    const PlannerConfig cfg = small_planner();
    PlannerWeights w = init_planner_weights(cfg, 6, RngSeed{5}, 0.3);
    Rng rng(RngSeed{6});
    const Matrix2D mem = oracle::random_matrix(rng, 1, 6);
    const Trajectory base = decode_trajectory(mem, cfg, w);
    for (auto& l : w.layers) {
        l.wq = oracle::random_matrix(rng, 8, 8, 5.0);
        l.wk = oracle::random_matrix(rng, 8, 8, 5.0);
    }
    const Trajectory changed = decode_trajectory(mem, cfg, w);
    EXPECT_LT(oracle::max_abs_diff(base.waypoints, changed.waypoints), 1e-12);
}

TEST(Planner, ZeroWeightsGiveHeadBias) {
    const PlannerConfig cfg = small_planner();
    PlannerWeights w = init_planner_weights(cfg, 6, RngSeed{7});
    w.head = Matrix2D(8, 3, 0.0);
    w.head_bias = {1.5, -0.25, 0.125};
    Rng rng(RngSeed{8});
    const Trajectory t = decode_trajectory(oracle::random_matrix(rng, 4, 6), cfg, w);
    for (std::size_t i = 0; i < t.steps(); ++i) {
        EXPECT_EQ(t.waypoints(i, 0), 1.5);
        EXPECT_EQ(t.waypoints(i, 1), -0.25);
        EXPECT_EQ(t.waypoints(i, 2), 0.125);
    }
}

TEST(Planner, MatchesLoopOracle) {
    const PlannerConfig cfg = small_planner();
    PlannerWeights w = init_planner_weights(cfg, 6, RngSeed{9}, 0.3);
    Rng rng(RngSeed{10});
    for (double& b : w.memory_bias) b = rng.normal();
    for (double& b : w.head_bias) b = rng.normal();
    const Matrix2D memory = oracle::random_matrix(rng, 7, 6);
    Matrix2D mem = oracle::matmul(memory, w.memory_proj);
    for (std::size_t r = 0; r < mem.rows(); ++r) {
        for (std::size_t c = 0; c < mem.cols(); ++c) mem(r, c) += w.memory_bias[c];
    }
    Matrix2D x = w.queries;
    for (const auto& l : w.layers) x = block_oracle(x, mem, l, cfg.num_heads);
    Matrix2D expect = oracle::matmul(x, w.head);
    for (std::size_t r = 0; r < expect.rows(); ++r) {
        for (std::size_t c = 0; c < 3; ++c) expect(r, c) += w.head_bias[c];
    }
    EXPECT_LT(oracle::max_abs_diff(decode_trajectory(memory, cfg, w).waypoints, expect), 1e-12);
}

TEST(Planner, RefinerDefaultIsIdentity) {
    const Trajectory t = traj(Matrix2D{{1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(identity_refiner(t), t);
}

TEST(Planner, CsvRoundTripIsExact) {
    Rng rng(RngSeed{11});
    const Trajectory t = traj(oracle::random_matrix(rng, 6, 3, 1e3));
    std::stringstream ss;
    write_trajectory_csv(ss, t);
    EXPECT_EQ(ss.str().substr(0, 14), "t,x,y,heading\n");
    EXPECT_EQ(read_trajectory_csv(ss), t);
    std::istringstream bad("x,y\n1,2\n");
    EXPECT_THROW(read_trajectory_csv(bad), ShapeError);
}

TEST(Loss, SmoothL1Values) {
    EXPECT_EQ(smooth_l1(0.0), 0.0);
    EXPECT_EQ(smooth_l1(0.5), 0.125);
    EXPECT_EQ(smooth_l1(-0.5), 0.125);
    EXPECT_EQ(smooth_l1(1.0), 0.5);
    EXPECT_EQ(smooth_l1(3.0), 2.5);
    EXPECT_EQ(smooth_l1(-3.0), 2.5);
    EXPECT_EQ(smooth_l1_grad(0.5), 0.5);
    EXPECT_EQ(smooth_l1_grad(3.0), 1.0);
    EXPECT_EQ(smooth_l1_grad(-3.0), -1.0);
}

TEST(Loss, IdenticalTrajectoriesGiveZero) {
    const Trajectory t = traj(Matrix2D{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    const LossParts p = composite_loss(t, t, {});
    EXPECT_EQ(p.total, 0.0);
}

TEST(Loss, ConstantOffsetExample) {
    // Every coordinate off by 0.5: each term is 0.125 except velocity, which is 0.
    const Trajectory gt = traj(Matrix2D{{0, 0, 0}, {1, 0.1, 0.01}, {2, 0.3, 0.02}, {3, 0.6, 0.05}});
    Matrix2D p = gt.waypoints;
    for (double& v : p.data()) v += 0.5;
    const LossParts parts = composite_loss(traj(p), gt, {2.0, 0.5, 1.0});
    EXPECT_DOUBLE_EQ(parts.traj, 0.125);
    EXPECT_DOUBLE_EQ(parts.lateral, 0.125);
    EXPECT_NEAR(parts.velocity, 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(parts.endpoint, 0.125);
    EXPECT_DOUBLE_EQ(parts.total, 0.125 + 2.0 * 0.125 + 1.0 * 0.125);
}

TEST(Loss, PartsMatchLoopOracle) {
    Rng rng(RngSeed{12});
    const LossWeights lambda{1.7, 0.3, 2.2};
    for (int trial = 0; trial < 20; ++trial) {
        const Trajectory a = traj(oracle::random_matrix(rng, 6, 3, 2.0));
        const Trajectory b = traj(oracle::random_matrix(rng, 6, 3, 2.0));
        double traj_sum = 0, lat = 0, vel = 0, end = 0;
        for (std::size_t t = 0; t < 6; ++t) {
            for (std::size_t c = 0; c < 3; ++c) {
                traj_sum += smooth_l1(a.waypoints(t, c) - b.waypoints(t, c));
                if (t > 0) {
                    vel += smooth_l1((a.waypoints(t, c) - a.waypoints(t - 1, c)) -
                                     (b.waypoints(t, c) - b.waypoints(t - 1, c)));
                }
            }
            lat += smooth_l1(a.waypoints(t, 1) - b.waypoints(t, 1));
        }
        for (std::size_t c = 0; c < 3; ++c) end += smooth_l1(a.waypoints(5, c) - b.waypoints(5, c));
        const LossParts p = composite_loss(a, b, lambda);
        EXPECT_NEAR(p.traj, traj_sum / 18.0, 1e-12);
        EXPECT_NEAR(p.lateral, lat / 6.0, 1e-12);
        EXPECT_NEAR(p.velocity, vel / 15.0, 1e-12);
        EXPECT_NEAR(p.endpoint, end / 3.0, 1e-12);
        EXPECT_NEAR(p.total, p.traj + 1.7 * p.lateral + 0.3 * p.velocity + 2.2 * p.endpoint, 1e-12);
        EXPECT_GE(p.total, 0.0);
    }
}

TEST(Loss, GradientMatchesCentralDifference) {
    Rng rng(RngSeed{13});
    const LossWeights lambda{2.0, 0.5, 1.0};
    const Trajectory gt = traj(oracle::random_matrix(rng, 5, 3));
    Matrix2D pred = oracle::random_matrix(rng, 5, 3, 1.5);
    const Matrix2D g = loss_gradient(traj(pred), gt, lambda);
    for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            auto f = [&](double v) {
                Matrix2D p = pred;
                p(r, c) = v;
                return composite_loss(traj(p), gt, lambda).total;
            };
            const double fd = oracle::central_difference(f, pred(r, c), 1e-5);
            EXPECT_LE(std::abs(fd - g(r, c)), 1e-4 * std::max(1.0, std::abs(fd))) << r << "," << c;
        }
    }
}

TEST(Loss, TranslationInvariant) {
    Rng rng(RngSeed{14});
    const Trajectory a = traj(oracle::random_matrix(rng, 6, 3));
    const Trajectory b = traj(oracle::random_matrix(rng, 6, 3));
    Matrix2D a2 = a.waypoints, b2 = b.waypoints;
    for (std::size_t t = 0; t < 6; ++t) {
        for (std::size_t c = 0; c < 3; ++c) {
            a2(t, c) += 10.0 * static_cast<double>(c + 1);
            b2(t, c) += 10.0 * static_cast<double>(c + 1);
        }
    }
    EXPECT_NEAR(composite_loss(a, b, {}).total, composite_loss(traj(a2), traj(b2), {}).total, 1e-12);
}

TEST(Loss, Preconditions) {
    EXPECT_THROW(composite_loss(traj(Matrix2D(3, 3)), traj(Matrix2D(4, 3)), {}), ShapeError);
    EXPECT_THROW(composite_loss(traj(Matrix2D(3, 2)), traj(Matrix2D(3, 2)), {}), ShapeError);
    EXPECT_THROW(composite_loss(traj(Matrix2D(1, 3)), traj(Matrix2D(1, 3)), {}), PreconditionError);
}
