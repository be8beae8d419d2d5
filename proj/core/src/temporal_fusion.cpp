// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/temporal_fusion.hpp"

#include <cmath>

#include "tokenadapt/attention.hpp"
#include "tokenadapt/decoder.hpp"
#include "tokenadapt/errors.hpp"

namespace tokenadapt {

void FrameFeatures::validate() const {
    if (frames.dim0() == 0) {
        throw ShapeError("FrameFeatures: no frames");
    }
    std::size_t expected = 0;
    for (const auto& v : views) {
        if (v.begin != expected || v.end <= v.begin) {
            throw ShapeError("FrameFeatures: view spans do not partition the token axis at " +
                             std::to_string(expected));
        }
        expected = v.end;
    }
    if (expected != tokens()) {
        throw ShapeError("FrameFeatures: view spans cover " + std::to_string(expected) + " of " +
                         std::to_string(tokens()) + " tokens");
    }
}

ArchSpec TfmSpec::as_arch() const {
    ArchSpec a;
    a.num_layers = num_layers;
    a.d_model = dim;
    a.num_heads = num_heads;
    a.head_dim = num_heads == 0 ? 0 : dim / num_heads;
    a.ffn_dim = ffn_dim;
    return a;
}

TfmWeights init_tfm_weights(const TfmSpec& spec, std::size_t history, RngSeed seed, double stddev) {
    const ArchSpec arch = spec.as_arch();
    arch.validate();
    Rng root = Rng(seed).split("tfm");
    Rng emb = root.split("time_embedding");
    TfmWeights w;
    w.time_embedding = Matrix2D(history + 1, spec.dim);
    for (double& v : w.time_embedding.data()) {
        v = emb.normal(0.0, stddev);
    }
    for (std::size_t l = 0; l < spec.num_layers; ++l) {
        w.encoder.push_back(init_layer_weights(arch, root.split(l), WeightInit{stddev, 0.0}));
    }
    w.time_weights.assign(history + 1, 1.0 / static_cast<double>(history + 1));
    return w;
}

FrameFeatures add_time_embedding(const FrameFeatures& f, const Matrix2D& time_embedding) {
    if (time_embedding.rows() != f.frames.dim0() || time_embedding.cols() != f.dim()) {
        throw ShapeError("add_time_embedding: embedding " + time_embedding.shape_string() + " for frames " +
                         f.frames.shape_string());
    }
    FrameFeatures out = f;
    for (std::size_t t = 0; t < f.frames.dim0(); ++t) {
        auto e = time_embedding.row(t);
        for (std::size_t tok = 0; tok < f.tokens(); ++tok) {
            auto v = out.frames.vec(t, tok);
            for (std::size_t c = 0; c < v.size(); ++c) {
                v[c] += e[c];
            }
        }
    }
    return out;
}

Matrix2D temporal_block_forward(const Matrix2D& x, const LayerWeights& w, const TfmSpec& spec) {
    const ArchSpec arch = spec.as_arch();
    const Matrix2D normed = rms_norm(x, w.attn_norm_gain);
    const Matrix2D q = matmul(normed, w.wq);
    const Matrix2D k = matmul(normed, w.wk);
    const Matrix2D v = matmul(normed, w.wv);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(arch.head_dim));
    Matrix2D heads(x.rows(), arch.d_model);
    for (std::size_t h = 0; h < arch.num_heads; ++h) {
        const std::size_t off = h * arch.head_dim;
        const Matrix2D qh = q.col_block(off, arch.head_dim);
        const Matrix2D kh = k.col_block(off, arch.head_dim);
        const Matrix2D vh = v.col_block(off, arch.head_dim);
        const Matrix2D probs = softmax_rows(scale(matmul_transposed(qh, kh), inv_sqrt_d));
        const Matrix2D oh = matmul(probs, vh);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t c = 0; c < arch.head_dim; ++c) {
                heads(r, off + c) = oh(r, c);
            }
        }
    }
    const Matrix2D h1 = add(x, matmul(heads, w.wo));
    return add(h1, ffn_forward(rms_norm(h1, w.ffn_norm_gain), w));
}

FrameFeatures temporal_encode(const FrameFeatures& f, const TfmWeights& w, const TfmSpec& spec) {
    if (f.dim() != spec.dim) {
        throw ShapeError("temporal_encode: feature dim " + std::to_string(f.dim()) + " but encoder dim " +
                         std::to_string(spec.dim));
    }
    const ArchSpec arch = spec.as_arch();
    for (const auto& layer : w.encoder) {
        layer.validate(arch);
    }
    FrameFeatures out = f;
    const std::size_t steps = f.frames.dim0();
    Matrix2D column(steps, f.dim());
    for (std::size_t tok = 0; tok < f.tokens(); ++tok) {
        for (std::size_t t = 0; t < steps; ++t) {
            auto src = f.frames.vec(t, tok);
            std::copy(src.begin(), src.end(), column.row(t).begin());
        }
        Matrix2D x = column;
        for (const auto& layer : w.encoder) {
            x = temporal_block_forward(x, layer, spec);
        }
        for (std::size_t t = 0; t < steps; ++t) {
            auto dst = out.frames.vec(t, tok);
            auto src = x.row(t);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    }
    return out;
}

Matrix2D time_weighted_aggregate(const FrameFeatures& seq, std::span<const double> weights) {
    if (weights.size() != seq.frames.dim0()) {
        throw ShapeError("time_weighted_aggregate: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(seq.frames.dim0()) + " frames");
    }
    double denom = 0.0;
    for (double w : weights) {
        denom += w;
    }
    if (!(std::abs(denom) > kTimeWeightEps)) {
        throw DegenerateWeightsError("time_weighted_aggregate: |sum w| = " + std::to_string(std::abs(denom)) +
                                     " <= 1e-8");
    }
    Matrix2D out(seq.tokens(), seq.dim());
    for (std::size_t t = 0; t < seq.frames.dim0(); ++t) {
        for (std::size_t tok = 0; tok < seq.tokens(); ++tok) {
            auto src = seq.frames.vec(t, tok);
            auto dst = out.row(tok);
            for (std::size_t c = 0; c < dst.size(); ++c) {
                dst[c] += weights[t] * src[c];
            }
        }
    }
    for (double& v : out.data()) {
        v /= denom;
    }
    return out;
}

Matrix2D tfm_forward(const FrameFeatures& f, const TfmWeights& w, const TfmSpec& spec) {
    f.validate();
    return time_weighted_aggregate(temporal_encode(add_time_embedding(f, w.time_embedding), w, spec),
                                   w.time_weights);
}

AdapterWeights init_adapter(std::size_t in_dim, std::size_t out_dim, RngSeed seed, double stddev) {
    AdapterWeights a;
    a.bias.assign(out_dim, 0.0);
    if (in_dim == out_dim) {
        a.weight = Matrix2D::identity(in_dim);
        return a;
    }
    Rng rng = Rng(seed).split("adapter");
    a.weight = Matrix2D(in_dim, out_dim);
    for (double& v : a.weight.data()) {
        v = rng.normal(0.0, stddev);
    }
    return a;
}

Matrix2D adapter_project(const Matrix2D& fused, const AdapterWeights& adapter) {
    return add_row_bias(matmul(fused, adapter.weight), adapter.bias);
}

}  // namespace tokenadapt
