// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/loss.hpp"

#include <cmath>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

double smooth_l1(double r) noexcept {
    const double a = std::abs(r);
    return a < 1.0 ? 0.5 * r * r : a - 0.5;
}

double smooth_l1_grad(double r) noexcept {
    if (r >= 1.0) {
        return 1.0;
    }
    if (r <= -1.0) {
        return -1.0;
    }
    return r;
}

namespace {

void check(const Trajectory& pred, const Trajectory& gt) {
    const Matrix2D& p = pred.waypoints;
    const Matrix2D& g = gt.waypoints;
    if (p.rows() != g.rows() || p.cols() != g.cols()) {
        throw ShapeError("composite_loss: prediction " + p.shape_string() + " vs ground truth " + g.shape_string());
    }
    if (p.cols() != kWaypointDim) {
        throw ShapeError("composite_loss: waypoints must have 3 columns, got " + p.shape_string());
    }
    if (p.rows() < 2) {
        throw PreconditionError("composite_loss: need at least 2 waypoints");
    }
}

constexpr std::size_t kLateral = 1;

}  // namespace

LossParts composite_loss(const Trajectory& pred, const Trajectory& gt, const LossWeights& lambda) {
    check(pred, gt);
    const Matrix2D& p = pred.waypoints;
    const Matrix2D& g = gt.waypoints;
    const std::size_t steps = p.rows();
    const std::size_t last = steps - 1;

    LossParts parts;
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t c = 0; c < kWaypointDim; ++c) {
            parts.traj += smooth_l1(p(t, c) - g(t, c));
        }
        parts.lateral += smooth_l1(p(t, kLateral) - g(t, kLateral));
    }
    for (std::size_t t = 1; t < steps; ++t) {
        for (std::size_t c = 0; c < kWaypointDim; ++c) {
            parts.velocity += smooth_l1((p(t, c) - p(t - 1, c)) - (g(t, c) - g(t - 1, c)));
        }
    }
    for (std::size_t c = 0; c < kWaypointDim; ++c) {
        parts.endpoint += smooth_l1(p(last, c) - g(last, c));
    }
    parts.traj /= static_cast<double>(steps * kWaypointDim);
    parts.lateral /= static_cast<double>(steps);
    parts.velocity /= static_cast<double>((steps - 1) * kWaypointDim);
    parts.endpoint /= static_cast<double>(kWaypointDim);
    parts.total = parts.traj + lambda.lateral * parts.lateral + lambda.velocity * parts.velocity +
                  lambda.endpoint * parts.endpoint;
    return parts;
}

Matrix2D loss_gradient(const Trajectory& pred, const Trajectory& gt, const LossWeights& lambda) {
    check(pred, gt);
    const Matrix2D& p = pred.waypoints;
    const Matrix2D& g = gt.waypoints;
    const std::size_t steps = p.rows();
    const std::size_t last = steps - 1;
    const double n_traj = static_cast<double>(steps * kWaypointDim);
    const double n_vel = static_cast<double>((steps - 1) * kWaypointDim);

    Matrix2D grad(steps, kWaypointDim);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t c = 0; c < kWaypointDim; ++c) {
            grad(t, c) += smooth_l1_grad(p(t, c) - g(t, c)) / n_traj;
        }
        grad(t, kLateral) += lambda.lateral * smooth_l1_grad(p(t, kLateral) - g(t, kLateral)) /
                             static_cast<double>(steps);
    }
    for (std::size_t t = 1; t < steps; ++t) {
        for (std::size_t c = 0; c < kWaypointDim; ++c) {
            const double gr =
                lambda.velocity * smooth_l1_grad((p(t, c) - p(t - 1, c)) - (g(t, c) - g(t - 1, c))) / n_vel;
            grad(t, c) += gr;
            grad(t - 1, c) -= gr;
        }
    }
    for (std::size_t c = 0; c < kWaypointDim; ++c) {
        grad(last, c) += lambda.endpoint * smooth_l1_grad(p(last, c) - g(last, c)) / static_cast<double>(kWaypointDim);
    }
    return grad;
}

}  // namespace tokenadapt
