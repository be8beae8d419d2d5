// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tokenadapt/planner.hpp"

namespace tokenadapt {

/// Smooth-L1 with transition at |r| = 1: 0.5 r^2 inside, |r| - 0.5 outside.
double smooth_l1(double r) noexcept;
double smooth_l1_grad(double r) noexcept;

struct LossParts {
    double traj = 0.0;      // all coordinates
    double lateral = 0.0;   // y column only
    double velocity = 0.0;  // first differences of all coordinates
    double endpoint = 0.0;  // final waypoint
    double total = 0.0;     // traj + l1*lateral + l2*velocity + l3*endpoint
};

/// Every part is a mean of smooth-L1 terms over its elements. Requires T_r >= 2.
LossParts composite_loss(const Trajectory& pred, const Trajectory& gt, const LossWeights& lambda);

/// d(total)/d(pred), same shape as pred.waypoints.
Matrix2D loss_gradient(const Trajectory& pred, const Trajectory& gt, const LossWeights& lambda);

}  // namespace tokenadapt
