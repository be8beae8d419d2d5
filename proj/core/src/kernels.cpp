// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

Matrix2D matmul(const Matrix2D& a, const Matrix2D& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + a.shape_string() + " x " + b.shape_string());
    }
    const std::size_t n = a.rows();
    const std::size_t m = a.cols();
    const std::size_t p = b.cols();
    Matrix2D out(n, p);
    // i-k-j order keeps the inner loop contiguous in both b and out.
    const double* __restrict bd = b.data().data();
    for (std::size_t i = 0; i < n; ++i) {
        double* __restrict out_row = out.row(i).data();
        const double* __restrict a_row = a.row(i).data();
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = a_row[k];
            const double* __restrict b_row = bd + k * p;
            for (std::size_t j = 0; j < p; ++j) {
                out_row[j] += aik * b_row[j];
            }
        }
    }
    return out;
}

Matrix2D matmul_transposed(const Matrix2D& a, const Matrix2D& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_transposed: " + a.shape_string() + " x " + b.shape_string() + "^T");
    }
    Matrix2D out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ar = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            auto br = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < ar.size(); ++k) {
                acc += ar[k] * br[k];
            }
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix2D add(const Matrix2D& a, const Matrix2D& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("add: " + a.shape_string() + " + " + b.shape_string());
    }
    Matrix2D out = a;
    auto od = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < od.size(); ++i) {
        od[i] += bd[i];
    }
    return out;
}

Matrix2D scale(const Matrix2D& a, double c) {
    Matrix2D out = a;
    for (double& v : out.data()) {
        v *= c;
    }
    return out;
}

Matrix2D add_row_bias(const Matrix2D& a, std::span<const double> bias) {
    if (bias.size() != a.cols()) {
        throw ShapeError("add_row_bias: bias length " + std::to_string(bias.size()) + " for " + a.shape_string());
    }
    Matrix2D out = a;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] += bias[c];
        }
    }
    return out;
}

Matrix2D softmax_rows(const Matrix2D& m) {
    if (m.cols() == 0 && m.rows() > 0) {
        throw PreconditionError("softmax_rows: empty row in " + m.shape_string());
    }
    Matrix2D out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto in = m.row(r);
        auto o = out.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            o[c] = std::exp(in[c] - mx);
            sum += o[c];
        }
        for (double& v : o) {
            v /= sum;
        }
    }
    return out;
}

Matrix2D rms_norm(const Matrix2D& x, std::span<const double> gain) {
    if (gain.size() != x.cols()) {
        throw ShapeError("rms_norm: gain length " + std::to_string(gain.size()) + " for " + x.shape_string());
    }
    Matrix2D out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto in = x.row(r);
        double ms = 0.0;
        for (double v : in) {
            ms += v * v;
        }
        ms /= static_cast<double>(in.size());
        const double inv = 1.0 / std::sqrt(ms + kRmsNormEps);
        auto o = out.row(r);
        for (std::size_t c = 0; c < in.size(); ++c) {
            o[c] = in[c] * inv * gain[c];
        }
    }
    return out;
}

double silu(double x) noexcept { return x / (1.0 + std::exp(-x)); }

CosineSimilarity cosine_sim_matrix(const Matrix2D& x) {
    const std::size_t n = x.rows();
    std::vector<double> norms(n);
    CosineSimilarity result{Matrix2D(n, n), {}};
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : x.row(i)) {
            s += v * v;
        }
        norms[i] = std::sqrt(s);
        if (norms[i] == 0.0) {
            result.zero_norm_rows.push_back(i);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (norms[i] == 0.0) {
            continue;
        }
        result.sim(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (norms[j] == 0.0) {
                continue;
            }
            auto a = x.row(i);
            auto b = x.row(j);
            double dot = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) {
                dot += a[k] * b[k];
            }
            const double c = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
            result.sim(i, j) = c;
            result.sim(j, i) = c;
        }
    }
    return result;
}

Matrix3D rope_apply(const Matrix3D& x, std::span<const double> positions, double theta_base) {
    const std::size_t heads = x.dim0();
    const std::size_t len = x.dim1();
    const std::size_t hd = x.dim2();
    if (hd % 2 != 0) {
        throw ShapeError("rope_apply: odd head_dim in " + x.shape_string());
    }
    if (positions.size() != len) {
        throw ShapeError("rope_apply: " + std::to_string(positions.size()) + " positions for " + x.shape_string());
    }
    std::vector<double> inv_freq(hd / 2);
    for (std::size_t i = 0; i < hd / 2; ++i) {
        inv_freq[i] = std::pow(theta_base, -2.0 * static_cast<double>(i) / static_cast<double>(hd));
    }
    Matrix3D out(heads, len, hd);
    for (std::size_t p = 0; p < len; ++p) {
        for (std::size_t i = 0; i < hd / 2; ++i) {
            const double angle = positions[p] * inv_freq[i];
            const double c = std::cos(angle);
            const double s = std::sin(angle);
            for (std::size_t h = 0; h < heads; ++h) {
                const double x0 = x(h, p, 2 * i);
                const double x1 = x(h, p, 2 * i + 1);
                out(h, p, 2 * i) = x0 * c - x1 * s;
                out(h, p, 2 * i + 1) = x0 * s + x1 * c;
            }
        }
    }
    return out;
}

}  // namespace tokenadapt
