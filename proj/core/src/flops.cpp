// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/flops.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "json_io.hpp"

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

namespace {

using u64 = std::uint64_t;

double flops_of(u64 macs) { return 2.0 * static_cast<double>(macs); }

}  // namespace

void FlopsArchAssumptions::validate() const {
    if (num_layers == 0 || d_model == 0 || num_heads == 0 || ffn_dim == 0 || views == 0 ||
        llm_visual_tokens == 0) {
        throw PreconditionError("FlopsArchAssumptions: layer, width, head, view and visual counts must be positive");
    }
    if (d_model % num_heads != 0) {
        throw ShapeError("FlopsArchAssumptions: d_model " + std::to_string(d_model) + " not divisible by " +
                         std::to_string(num_heads) + " heads");
    }
    if (frontend_flops && *frontend_flops < 0.0) {
        throw PreconditionError("FlopsArchAssumptions: negative frontend constant");
    }
}

FlopsArchAssumptions reference_7b_assumptions() {
    return calibrate_frontend(FlopsArchAssumptions{}, kReferenceDenseFlops);
}

FlopsArchAssumptions assumptions_for(const ArchSpec& spec, const SequenceLayout& layout) {
    FlopsArchAssumptions a;
    a.num_layers = spec.num_layers;
    a.d_model = spec.d_model;
    a.num_heads = spec.num_heads;
    a.ffn_dim = spec.ffn_dim;
    a.views = std::max<std::size_t>(layout.num_views(), 1);
    a.llm_visual_tokens = layout.visual_count();
    a.encoder_tokens_per_view = a.llm_visual_tokens / a.views;
    a.text_tokens = layout.text_indices().size();
    a.other_tokens = layout.size() - a.llm_visual_tokens - a.text_tokens;
    a.tfm_dim = spec.d_model;
    a.tfm_ffn_dim = spec.ffn_dim;
    a.frontend_flops = 0.0;
    return a;
}

LayerMacs layer_macs(const FlopsArchAssumptions& a, std::size_t length, bool sparse, std::size_t visual,
                     std::size_t text) {
    const u64 len = length;
    const u64 d = a.d_model;
    LayerMacs m;
    m.projection = 4 * len * d * d;
    m.score = len * len * d;
    m.value = len * len * d;
    m.ffn = 3 * len * d * a.ffn_dim;
    if (sparse) {
        m.scoring = len * len * d;
        m.anchor = u64(visual) * u64(text) * d;
    }
    return m;
}

double tfm_flops(const FlopsArchAssumptions& a) {
    // Each visual token attends across its own history of n + 1 frames.
    const double frames = static_cast<double>(a.history_frames + 1);
    const double d = static_cast<double>(a.tfm_dim);
    const double tokens = static_cast<double>(a.llm_visual_tokens);
    const double linear = 2.0 * (4.0 * d * d + 3.0 * d * static_cast<double>(a.tfm_ffn_dim));
    const double attn = 4.0 * frames * d;
    const double per_layer = tokens * frames * (linear + attn);
    const double aggregate = 2.0 * tokens * frames * d;
    return static_cast<double>(a.tfm_layers) * per_layer + aggregate;
}

double adapter_flops(const FlopsArchAssumptions& a) {
    return 2.0 * static_cast<double>(a.llm_visual_tokens) * static_cast<double>(a.tfm_dim) *
           static_cast<double>(a.d_model);
}

namespace {

LayerFlops cost_layer(const FlopsArchAssumptions& a, std::size_t layer, std::size_t length, std::size_t visual,
                      bool sparse) {
    LayerFlops f;
    f.layer = layer;
    f.length = length;
    f.visual = visual;
    f.sparse = sparse;
    f.macs = layer_macs(a, length, sparse, visual, a.text_tokens);
    const double len = static_cast<double>(length);
    const double d = static_cast<double>(a.d_model);
    const double scores = len * len * static_cast<double>(a.num_heads);
    f.projection_flops = flops_of(f.macs.projection);
    f.attention_flops = flops_of(f.macs.score) + flops_of(f.macs.value) + kSoftmaxFlopsPerScore * scores;
    f.ffn_flops = flops_of(f.macs.ffn) + kGateFlopsPerElement * len * static_cast<double>(a.ffn_dim);
    f.elementwise_flops = 2.0 * kRmsNormFlopsPerElement * len * d + 2.0 * kRopeFlopsPerElement * len * d +
                          2.0 * kResidualFlopsPerElement * len * d;
    if (sparse) {
        // Scoring logits, their softmax, and the anchor similarity pass.
        f.eager_overhead_flops = flops_of(f.macs.scoring) + flops_of(f.macs.anchor) + kSoftmaxFlopsPerScore * scores;
    }
    return f;
}

FlopsReport finish(const FlopsArchAssumptions& a, std::vector<LayerFlops> layers) {
    FlopsReport r;
    r.layers = std::move(layers);
    for (const auto& l : r.layers) {
        r.llm_flops += l.total();
        r.eager_overhead_flops += l.eager_overhead_flops;
    }
    r.tfm_flops = tfm_flops(a);
    r.adapter_flops = adapter_flops(a);
    r.frontend_analytic_flops = r.tfm_flops + r.adapter_flops;
    r.frontend_flops = a.frontend_flops.value_or(r.frontend_analytic_flops);
    r.total_flops = r.llm_flops + r.frontend_flops;
    return r;
}

}  // namespace

double FlopsReport::attention_flops() const noexcept {
    double s = 0.0;
    for (const auto& l : layers) {
        s += l.attention_flops;
    }
    return s;
}

double FlopsReport::ffn_flops() const noexcept {
    double s = 0.0;
    for (const auto& l : layers) {
        s += l.ffn_flops;
    }
    return s;
}

LayerMacs FlopsReport::total_macs() const noexcept {
    LayerMacs t;
    for (const auto& l : layers) {
        t.projection += l.macs.projection;
        t.score += l.macs.score;
        t.value += l.macs.value;
        t.ffn += l.macs.ffn;
        t.scoring += l.macs.scoring;
        t.anchor += l.macs.anchor;
    }
    return t;
}

FlopsReport dense_flops(const FlopsArchAssumptions& a) {
    a.validate();
    std::vector<LayerFlops> layers;
    layers.reserve(a.num_layers);
    for (std::size_t l = 0; l < a.num_layers; ++l) {
        layers.push_back(cost_layer(a, l, a.sequence_length(), a.llm_visual_tokens, false));
    }
    return finish(a, std::move(layers));
}

FlopsReport pruned_flops(const FlopsArchAssumptions& a, const PruneConfig& cfg) {
    a.validate();
    cfg.validate();
    for (std::size_t s : cfg.sparse_layers) {
        if (s >= a.num_layers) {
            throw PreconditionError("pruned_flops: sparse layer " + std::to_string(s) + " outside " +
                                    std::to_string(a.num_layers) + " layers");
        }
    }
    std::vector<LayerFlops> layers;
    layers.reserve(a.num_layers);
    std::size_t visual = a.llm_visual_tokens;
    for (std::size_t l = 0; l < a.num_layers; ++l) {
        const bool sparse = std::find(cfg.sparse_layers.begin(), cfg.sparse_layers.end(), l) != cfg.sparse_layers.end();
        layers.push_back(cost_layer(a, l, a.non_visual_tokens() + visual, visual, sparse));
        if (sparse) {
            visual = compute_budget(visual, cfg.pruning_rate, cfg.recycle_fraction).budget;
        }
    }
    return finish(a, std::move(layers));
}

double reduction_ratio(const FlopsReport& dense, const FlopsReport& pruned) {
    if (dense.total_flops <= 0.0) {
        throw PreconditionError("reduction_ratio: dense total must be positive");
    }
    return pruned.total_flops / dense.total_flops;
}

FlopsArchAssumptions calibrate_frontend(FlopsArchAssumptions a, double target) {
    a.frontend_flops = 0.0;
    const double llm = dense_flops(a).llm_flops;
    if (llm > target) {
        throw PreconditionError("calibrate_frontend: LLM alone costs " + std::to_string(llm * 1e-9) +
                                " GFLOPs, above the target " + std::to_string(target * 1e-9));
    }
    a.frontend_flops = target - llm;
    return a;
}

FlopsStudy flops_study(const FlopsArchAssumptions& a, const PruneConfig& cfg, const std::vector<std::size_t>& text_counts,
                       const std::vector<std::size_t>& sweep_layers, const std::vector<double>& sweep_rates) {
    FlopsStudy s;
    s.assumptions = a;
    s.prune = cfg;
    s.dense = dense_flops(a);
    s.pruned = pruned_flops(a, cfg);
    s.ratio = reduction_ratio(s.dense, s.pruned);
    for (std::size_t t : text_counts) {
        FlopsArchAssumptions v = a;
        v.text_tokens = t;
        const FlopsReport d = dense_flops(v);
        const FlopsReport p = pruned_flops(v, cfg);
        s.text_sensitivity.push_back({t, d.total_flops, p.total_flops, reduction_ratio(d, p)});
    }
    for (std::size_t layer : sweep_layers) {
        if (layer >= a.num_layers) {
            continue;
        }
        for (double r : sweep_rates) {
            const PruneConfig c{r, cfg.recycle_fraction, {layer}};
            const FlopsReport p = pruned_flops(a, c);
            s.sweep.push_back({layer, r, p.total_flops, reduction_ratio(s.dense, p)});
        }
    }
    return s;
}

std::string flops_study_json(const FlopsStudy& s) {
    using detail::Json;
    const FlopsArchAssumptions& a = s.assumptions;
    Json j;
    j["format"] = "tokenadapt-flops v1";
    j["assumptions"] = {{"num_layers", a.num_layers},
                        {"d_model", a.d_model},
                        {"num_heads", a.num_heads},
                        {"ffn_dim", a.ffn_dim},
                        {"views", a.views},
                        {"encoder_tokens_per_view", a.encoder_tokens_per_view},
                        {"llm_visual_tokens", a.llm_visual_tokens},
                        {"text_tokens", a.text_tokens},
                        {"other_tokens", a.other_tokens},
                        {"history_frames", a.history_frames},
                        {"tfm_dim", a.tfm_dim},
                        {"tfm_ffn_dim", a.tfm_ffn_dim},
                        {"tfm_layers", a.tfm_layers},
                        {"frontend_flops", s.dense.frontend_flops}};
    j["prune"] = {{"pruning_rate", s.prune.pruning_rate},
                  {"recycle_fraction", s.prune.recycle_fraction},
                  {"sparse_layers", s.prune.sparse_layers}};
    j["dense"] = detail::flops_json(s.dense);
    j["pruned"] = detail::flops_json(s.pruned);
    j["ratio"] = s.ratio;
    j["reduction"] = 1.0 - s.ratio;
    Json sens = Json::array();
    for (const auto& r : s.text_sensitivity) {
        sens.push_back({{"text_tokens", r.text_tokens},
                        {"dense_flops", r.dense_flops},
                        {"pruned_flops", r.pruned_flops},
                        {"ratio", r.ratio}});
    }
    j["text_sensitivity"] = std::move(sens);
    Json sweep = Json::array();
    for (const auto& r : s.sweep) {
        sweep.push_back({{"sparse_layer", r.sparse_layer},
                         {"pruning_rate", r.pruning_rate},
                         {"pruned_flops", r.pruned_flops},
                         {"ratio", r.ratio}});
    }
    j["sweep"] = std::move(sweep);
    return j.dump(2) + "\n";
}

std::string flops_study_csv(const FlopsStudy& s) {
    std::string out = "section,key,dense_gflops,pruned_gflops,ratio\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "setting,layers=%s rate=%.2f,%.3f,%.3f,%.6f\n",
                  s.prune.sparse_layers.empty() ? "none" : std::to_string(s.prune.sparse_layers.front()).c_str(),
                  s.prune.pruning_rate, s.dense.total_flops * 1e-9, s.pruned.total_flops * 1e-9, s.ratio);
    out += buf;
    for (const auto& r : s.text_sensitivity) {
        std::snprintf(buf, sizeof(buf), "text_tokens,%zu,%.3f,%.3f,%.6f\n", r.text_tokens, r.dense_flops * 1e-9,
                      r.pruned_flops * 1e-9, r.ratio);
        out += buf;
    }
    for (const auto& r : s.sweep) {
        std::snprintf(buf, sizeof(buf), "sweep,layer=%zu rate=%.2f,%.3f,%.3f,%.6f\n", r.sparse_layer, r.pruning_rate,
                      s.dense.total_flops * 1e-9, r.pruned_flops * 1e-9, r.ratio);
        out += buf;
    }
    return out;
}

}  // namespace tokenadapt
