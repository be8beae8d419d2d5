// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tokenadapt/matrix.hpp"

namespace tokenadapt {

inline constexpr double kRmsNormEps = 1e-6;
inline constexpr double kDefaultRopeTheta = 10000.0;

Matrix2D matmul(const Matrix2D& a, const Matrix2D& b);
/// a * b^T without forming the transpose.
Matrix2D matmul_transposed(const Matrix2D& a, const Matrix2D& b);

Matrix2D add(const Matrix2D& a, const Matrix2D& b);
Matrix2D scale(const Matrix2D& a, double c);
/// Adds `bias` to every row.
Matrix2D add_row_bias(const Matrix2D& a, std::span<const double> bias);

/// Row-wise softmax with max subtraction. Throws PreconditionError on zero-width rows.
Matrix2D softmax_rows(const Matrix2D& m);

/// x / sqrt(mean(x^2) + eps) * gain, per row.
Matrix2D rms_norm(const Matrix2D& x, std::span<const double> gain);

double silu(double x) noexcept;

struct CosineSimilarity {
    Matrix2D sim;
    /// Rows whose L2 norm is zero; their similarity to every other row is 0.
    std::vector<std::size_t> zero_norm_rows;
};

CosineSimilarity cosine_sim_matrix(const Matrix2D& x);

/// Rotary embedding over a [head, pos, head_dim] tensor. Dimension pairs are
/// (2i, 2i+1) with angle position * theta_base^(-2i/head_dim).
Matrix3D rope_apply(const Matrix3D& x, std::span<const double> positions, double theta_base = kDefaultRopeTheta);

}  // namespace tokenadapt
