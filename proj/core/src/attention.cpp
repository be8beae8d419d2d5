// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

namespace {

constexpr std::size_t kKeyBlock = 32;

struct Projections {
    Matrix3D q, k, v;  // [head, pos, head_dim]
};

void check_inputs(const Matrix2D& x, const LayerWeights& w, const ArchSpec& spec, std::size_t n_positions) {
    if (x.cols() != spec.d_model) {
        throw ShapeError("attention: input " + x.shape_string() + " but d_model is " + std::to_string(spec.d_model));
    }
    if (n_positions != x.rows()) {
        throw ShapeError("attention: " + std::to_string(n_positions) + " positions for " + x.shape_string());
    }
    w.validate(spec);
}

std::uint64_t u64(std::size_t v) { return static_cast<std::uint64_t>(v); }

Matrix3D project(const Matrix2D& x, const Matrix2D& weight, const ArchSpec& spec, OpCounter* counter) {
    if (counter != nullptr) {
        counter->projection_macs += u64(x.rows()) * u64(x.cols()) * u64(weight.cols());
    }
    return split_heads(matmul(x, weight), spec.num_heads, spec.head_dim);
}

Matrix2D output_projection(const Matrix3D& heads, const LayerWeights& w, OpCounter* counter) {
    Matrix2D merged = merge_heads(heads);
    if (counter != nullptr) {
        counter->projection_macs += u64(merged.rows()) * u64(merged.cols()) * u64(w.wo.cols());
    }
    return matmul(merged, w.wo);
}

// Four independent partial sums; the tail handles lengths not divisible by four.
inline double dot(std::span<const double> a, std::span<const double> b) {
    const double* __restrict x = a.data();
    const double* __restrict y = b.data();
    const std::size_t n = a.size();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += x[i] * y[i];
        s1 += x[i + 1] * y[i + 1];
        s2 += x[i + 2] * y[i + 2];
        s3 += x[i + 3] * y[i + 3];
    }
    for (; i < n; ++i) {
        s0 += x[i] * y[i];
    }
    return (s0 + s1) + (s2 + s3);
}

}  // namespace

Matrix3D split_heads(const Matrix2D& m, std::size_t heads, std::size_t head_dim) {
    if (m.cols() != heads * head_dim) {
        throw ShapeError("split_heads: " + m.shape_string() + " into " + std::to_string(heads) + " heads of " +
                         std::to_string(head_dim));
    }
    Matrix3D out(heads, m.rows(), head_dim);
    for (std::size_t p = 0; p < m.rows(); ++p) {
        for (std::size_t h = 0; h < heads; ++h) {
            for (std::size_t k = 0; k < head_dim; ++k) {
                out(h, p, k) = m(p, h * head_dim + k);
            }
        }
    }
    return out;
}

Matrix2D merge_heads(const Matrix3D& m) {
    const std::size_t heads = m.dim0();
    const std::size_t len = m.dim1();
    const std::size_t hd = m.dim2();
    Matrix2D out(len, heads * hd);
    for (std::size_t p = 0; p < len; ++p) {
        for (std::size_t h = 0; h < heads; ++h) {
            for (std::size_t k = 0; k < hd; ++k) {
                out(p, h * hd + k) = m(h, p, k);
            }
        }
    }
    return out;
}

AttentionResult attention_materialized(const Matrix2D& x, const LayerWeights& w, const ArchSpec& spec,
                                       std::span<const double> positions, OpCounter* counter) {
    check_inputs(x, w, spec, positions.size());
    const std::size_t len = x.rows();
    const std::size_t hd = spec.head_dim;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(hd));

    const Matrix3D q = rope_apply(project(x, w.wq, spec, counter), positions, spec.rope_theta);
    const Matrix3D k = rope_apply(project(x, w.wk, spec, counter), positions, spec.rope_theta);
    const Matrix3D v = project(x, w.wv, spec, counter);

    Matrix3D heads_out(spec.num_heads, len, hd);
    Matrix2D mean_probs(len, len);
    std::vector<double> row(len);
    for (std::size_t h = 0; h < spec.num_heads; ++h) {
        for (std::size_t i = 0; i < len; ++i) {
            // The full tile is computed; masked logits get probability exactly zero.
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < len; ++j) {
                row[j] = dot(q.vec(h, i), k.vec(h, j)) * inv_sqrt_d;
                if (j <= i) {
                    mx = std::max(mx, row[j]);
                }
            }
            double sum = 0.0;
            for (std::size_t j = 0; j <= i; ++j) {
                row[j] = std::exp(row[j] - mx);
                sum += row[j];
            }
            auto out = heads_out.vec(h, i);
            for (std::size_t j = 0; j <= i; ++j) {
                const double p = row[j] / sum;
                auto vj = v.vec(h, j);
                for (std::size_t c = 0; c < hd; ++c) {
                    out[c] += p * vj[c];
                }
                mean_probs(i, j) += p;
            }
        }
        if (counter != nullptr) {
            counter->score_macs += u64(len) * u64(len) * u64(hd);
            counter->value_macs += u64(len) * u64(len) * u64(hd);
        }
    }
    const double inv_heads = 1.0 / static_cast<double>(spec.num_heads);
    for (double& p : mean_probs.data()) {
        p *= inv_heads;
    }

    AttentionResult result;
    result.output = output_projection(heads_out, w, counter);
    result.causal_weights = std::move(mean_probs);
    return result;
}

Matrix2D attention_streaming(const Matrix2D& x, const LayerWeights& w, const ArchSpec& spec,
                             std::span<const double> positions, OpCounter* counter) {
    check_inputs(x, w, spec, positions.size());
    const std::size_t len = x.rows();
    const std::size_t hd = spec.head_dim;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(hd));

    const Matrix3D q = rope_apply(project(x, w.wq, spec, counter), positions, spec.rope_theta);
    const Matrix3D k = rope_apply(project(x, w.wk, spec, counter), positions, spec.rope_theta);
    const Matrix3D v = project(x, w.wv, spec, counter);

    Matrix3D heads_out(spec.num_heads, len, hd);
    std::vector<double> block(kKeyBlock);
    std::vector<double> acc(hd);
    for (std::size_t h = 0; h < spec.num_heads; ++h) {
        for (std::size_t i = 0; i < len; ++i) {
            double running_max = -std::numeric_limits<double>::infinity();
            double running_sum = 0.0;
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t start = 0; start < len; start += kKeyBlock) {
                const std::size_t stop = std::min(len, start + kKeyBlock);
                double block_max = -std::numeric_limits<double>::infinity();
                for (std::size_t j = start; j < stop; ++j) {
                    const double s = dot(q.vec(h, i), k.vec(h, j)) * inv_sqrt_d;
                    block[j - start] = j <= i ? s : -std::numeric_limits<double>::infinity();
                    block_max = std::max(block_max, block[j - start]);
                }
                const double new_max = std::max(running_max, block_max);
                if (new_max == -std::numeric_limits<double>::infinity()) {
                    continue;
                }
                const double correction = std::exp(running_max - new_max);
                running_sum *= correction;
                for (double& a : acc) {
                    a *= correction;
                }
                // Masked keys contribute exactly zero.
                for (std::size_t j = start; j < std::min(stop, i + 1); ++j) {
                    const double p = std::exp(block[j - start] - new_max);
                    running_sum += p;
                    auto vj = v.vec(h, j);
                    for (std::size_t c = 0; c < hd; ++c) {
                        acc[c] += p * vj[c];
                    }
                }
                running_max = new_max;
            }
            auto out = heads_out.vec(h, i);
            for (std::size_t c = 0; c < hd; ++c) {
                out[c] = acc[c] / running_sum;
            }
        }
        if (counter != nullptr) {
            counter->score_macs += u64(len) * u64(len) * u64(hd);
            counter->value_macs += u64(len) * u64(len) * u64(hd);
        }
    }
    return output_projection(heads_out, w, counter);
}

Matrix2D scoring_weights(const Matrix2D& x, const LayerWeights& w, const ArchSpec& spec, OpCounter* counter) {
    if (x.cols() != spec.d_model) {
        throw ShapeError("scoring_weights: input " + x.shape_string() + " but d_model is " +
                         std::to_string(spec.d_model));
    }
    w.validate(spec);
    const std::size_t len = x.rows();
    const std::size_t hd = spec.head_dim;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(hd));
    // Projections are shared with the main path, so only the logits are extra work.
    const Matrix3D q = split_heads(matmul(x, w.wq), spec.num_heads, hd);
    const Matrix3D k = split_heads(matmul(x, w.wk), spec.num_heads, hd);

    Matrix2D mean_probs(len, len);
    Matrix2D logits(len, len);
    for (std::size_t h = 0; h < spec.num_heads; ++h) {
        for (std::size_t i = 0; i < len; ++i) {
            for (std::size_t j = 0; j < len; ++j) {
                logits(i, j) = dot(q.vec(h, i), k.vec(h, j)) * inv_sqrt_d;
            }
        }
        const Matrix2D probs = softmax_rows(logits);
        for (std::size_t i = 0; i < mean_probs.size(); ++i) {
            mean_probs.data()[i] += probs.data()[i];
        }
        if (counter != nullptr) {
            counter->scoring_macs += u64(len) * u64(len) * u64(hd);
        }
    }
    const double inv_heads = 1.0 / static_cast<double>(spec.num_heads);
    for (double& p : mean_probs.data()) {
        p *= inv_heads;
    }
    return mean_probs;
}

AttentionResult attention_forward(const Matrix2D& x, const LayerWeights& w, const ArchSpec& spec,
                                  std::span<const double> positions, bool want_scoring, OpCounter* counter) {
    if (!want_scoring) {
        AttentionResult result;
        result.output = attention_streaming(x, w, spec, positions, counter);
        return result;
    }
    AttentionResult result = attention_materialized(x, w, spec, positions, counter);
    result.scoring_weights = scoring_weights(x, w, spec, counter);
    return result;
}

}  // namespace tokenadapt
