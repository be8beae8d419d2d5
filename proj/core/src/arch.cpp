// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/arch.hpp"

#include <algorithm>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

void ArchSpec::validate() const {
    if (num_layers == 0 || num_heads == 0 || head_dim == 0 || ffn_dim == 0) {
        throw PreconditionError("ArchSpec: layer, head, head_dim and ffn counts must be positive");
    }
    if (d_model != num_heads * head_dim) {
        throw ShapeError("ArchSpec: d_model " + std::to_string(d_model) + " != num_heads " +
                         std::to_string(num_heads) + " x head_dim " + std::to_string(head_dim));
    }
    if (head_dim % 2 != 0) {
        throw ShapeError("ArchSpec: head_dim must be even for RoPE, got " + std::to_string(head_dim));
    }
    for (std::size_t i = 0; i < sparse_layers.size(); ++i) {
        if (sparse_layers[i] >= num_layers) {
            throw PreconditionError("ArchSpec: sparse layer " + std::to_string(sparse_layers[i]) +
                                    " >= num_layers " + std::to_string(num_layers));
        }
        if (i > 0 && sparse_layers[i] <= sparse_layers[i - 1]) {
            throw PreconditionError("ArchSpec: sparse_layers must be strictly increasing");
        }
    }
}

bool ArchSpec::is_sparse_layer(std::size_t layer) const {
    return std::binary_search(sparse_layers.begin(), sparse_layers.end(), layer);
}

namespace {

void check_shape(const Matrix2D& m, std::size_t r, std::size_t c, const char* name) {
    if (m.rows() != r || m.cols() != c) {
        throw ShapeError(std::string("LayerWeights.") + name + ": expected [" + std::to_string(r) + "x" +
                         std::to_string(c) + "], got " + m.shape_string());
    }
}

Matrix2D random_matrix(std::size_t r, std::size_t c, Rng& rng, double stddev) {
    Matrix2D m(r, c);
    for (double& v : m.data()) {
        v = rng.normal(0.0, stddev);
    }
    return m;
}

}  // namespace

void LayerWeights::validate(const ArchSpec& spec) const {
    const std::size_t d = spec.d_model;
    check_shape(wq, d, d, "wq");
    check_shape(wk, d, d, "wk");
    check_shape(wv, d, d, "wv");
    check_shape(wo, d, d, "wo");
    check_shape(w_gate, d, spec.ffn_dim, "w_gate");
    check_shape(w_up, d, spec.ffn_dim, "w_up");
    check_shape(w_down, spec.ffn_dim, d, "w_down");
    if (attn_norm_gain.size() != d || ffn_norm_gain.size() != d) {
        throw ShapeError("LayerWeights: norm gains must have length d_model");
    }
}

LayerWeights init_layer_weights(const ArchSpec& spec, Rng rng, const WeightInit& init) {
    const std::size_t d = spec.d_model;
    LayerWeights w;
    w.wq = random_matrix(d, d, rng, init.stddev);
    w.wk = random_matrix(d, d, rng, init.stddev);
    w.wv = random_matrix(d, d, rng, init.stddev);
    w.wo = random_matrix(d, d, rng, init.stddev);
    w.w_gate = random_matrix(d, spec.ffn_dim, rng, init.stddev);
    w.w_up = random_matrix(d, spec.ffn_dim, rng, init.stddev);
    w.w_down = random_matrix(spec.ffn_dim, d, rng, init.stddev);
    for (std::size_t i = 0; i < d; ++i) {
        w.wq(i, i) += init.qk_identity_gain;
        w.wk(i, i) += init.qk_identity_gain;
    }
    w.attn_norm_gain.assign(d, 1.0);
    w.ffn_norm_gain.assign(d, 1.0);
    return w;
}

std::vector<LayerWeights> init_model_weights(const ArchSpec& spec, RngSeed seed, const WeightInit& init) {
    spec.validate();
    Rng root = Rng(seed).split("decoder");
    std::vector<LayerWeights> layers;
    layers.reserve(spec.num_layers);
    for (std::size_t l = 0; l < spec.num_layers; ++l) {
        layers.push_back(init_layer_weights(spec, root.split(l), init));
    }
    return layers;
}

LayerWeights zero_layer_weights(const ArchSpec& spec) {
    const std::size_t d = spec.d_model;
    LayerWeights w;
    w.wq = w.wk = w.wv = w.wo = Matrix2D(d, d);
    w.w_gate = w.w_up = Matrix2D(d, spec.ffn_dim);
    w.w_down = Matrix2D(spec.ffn_dim, d);
    w.attn_norm_gain.assign(d, 1.0);
    w.ffn_norm_gain.assign(d, 1.0);
    return w;
}

std::string to_string(Modality m) {
    switch (m) {
        case Modality::visual: return "visual";
        case Modality::text: return "text";
        case Modality::other: return "other";
    }
    return "other";
}

SequenceLayout::SequenceLayout(std::vector<TokenInfo> tokens) : tokens_(std::move(tokens)) {}

std::vector<std::size_t> SequenceLayout::visual_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i].modality == Modality::visual) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> SequenceLayout::text_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i].modality == Modality::text) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> SequenceLayout::non_visual_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i].modality != Modality::visual) {
            out.push_back(i);
        }
    }
    return out;
}

std::size_t SequenceLayout::visual_count() const {
    return static_cast<std::size_t>(std::count_if(tokens_.begin(), tokens_.end(),
                                                  [](const TokenInfo& t) { return t.modality == Modality::visual; }));
}

std::size_t SequenceLayout::num_views() const {
    std::size_t n = 0;
    for (const auto& t : tokens_) {
        if (t.modality == Modality::visual && t.view_id) {
            n = std::max(n, *t.view_id + 1);
        }
    }
    return n;
}

std::vector<double> SequenceLayout::positions() const {
    std::vector<double> out(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        out[i] = static_cast<double>(tokens_[i].original_position);
    }
    return out;
}

SequenceLayout SequenceLayout::select(std::span<const std::size_t> indices) const {
    std::vector<TokenInfo> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= tokens_.size()) {
            throw ShapeError("SequenceLayout::select: index " + std::to_string(i) + " out of range " +
                             std::to_string(tokens_.size()));
        }
        out.push_back(tokens_[i]);
    }
    return SequenceLayout(std::move(out));
}

SequenceLayout SequenceLayout::shifted(std::size_t offset, std::optional<Modality> which) const {
    std::vector<TokenInfo> out = tokens_;
    for (auto& t : out) {
        if (!which || t.modality == *which) {
            t.original_position += offset;
        }
    }
    return SequenceLayout(std::move(out));
}

void SequenceLayout::validate() const {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const auto& t = tokens_[i];
        if (i > 0 && t.original_position <= tokens_[i - 1].original_position) {
            throw PreconditionError("SequenceLayout: original_position not strictly increasing at row " +
                                    std::to_string(i));
        }
        if (t.modality == Modality::visual && !t.view_id) {
            throw PreconditionError("SequenceLayout: visual token at row " + std::to_string(i) + " has no view id");
        }
        if (t.modality == Modality::text && t.view_id) {
            throw PreconditionError("SequenceLayout: text token at row " + std::to_string(i) + " carries a view id");
        }
    }
}

}  // namespace tokenadapt
