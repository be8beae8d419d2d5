// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/ilsa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

void PruneConfig::validate() const {
    if (!(pruning_rate >= 0.0 && pruning_rate < 1.0)) {
        throw PreconditionError("PruneConfig: pruning_rate must be in [0, 1), got " + std::to_string(pruning_rate));
    }
    if (!(recycle_fraction >= 0.0 && recycle_fraction <= 1.0)) {
        throw PreconditionError("PruneConfig: recycle_fraction must be in [0, 1], got " +
                                std::to_string(recycle_fraction));
    }
    for (std::size_t i = 1; i < sparse_layers.size(); ++i) {
        if (sparse_layers[i] <= sparse_layers[i - 1]) {
            throw PreconditionError("PruneConfig: sparse_layers must be strictly increasing");
        }
    }
}

Budget compute_budget(std::size_t visual_count, double pruning_rate, double recycle_fraction) {
    if (visual_count == 0) {
        throw PreconditionError("compute_budget: no visual tokens");
    }
    const double raw = std::round((1.0 - pruning_rate) * static_cast<double>(visual_count));
    Budget b;
    b.budget = std::clamp<std::size_t>(static_cast<std::size_t>(raw), 1, visual_count);
    // The epsilon absorbs representation error, e.g. 0.9 * 10 must floor to 9.
    b.top_k = static_cast<std::size_t>(std::floor((1.0 - recycle_fraction) * static_cast<double>(b.budget) + 1e-9));
    b.top_k = std::min(b.top_k, b.budget);
    b.recycle_k = b.budget - b.top_k;
    return b;
}

AnchorSet select_text_anchors(const Matrix2D& h, const SequenceLayout& layout) {
    if (h.rows() != layout.size()) {
        throw ShapeError("select_text_anchors: " + h.shape_string() + " for a " + std::to_string(layout.size()) +
                         "-token layout");
    }
    const auto text = layout.text_indices();
    const auto visual = layout.visual_indices();
    if (text.empty()) {
        throw PreconditionError("select_text_anchors: layout has no text tokens");
    }
    if (visual.empty()) {
        throw PreconditionError("select_text_anchors: layout has no visual tokens");
    }
    const Matrix2D sim = softmax_rows(matmul_transposed(h.select_rows(visual), h.select_rows(text)));

    AnchorSet anchors;
    anchors.alignment.assign(text.size(), 0.0);
    for (std::size_t v = 0; v < sim.rows(); ++v) {
        for (std::size_t t = 0; t < text.size(); ++t) {
            anchors.alignment[t] += sim(v, t);
        }
    }
    for (double& a : anchors.alignment) {
        a /= static_cast<double>(visual.size());
    }
    anchors.threshold = std::accumulate(anchors.alignment.begin(), anchors.alignment.end(), 0.0) /
                        static_cast<double>(text.size());
    for (std::size_t t = 0; t < text.size(); ++t) {
        if (anchors.alignment[t] > anchors.threshold) {
            anchors.indices.push_back(text[t]);
        }
    }
    if (anchors.indices.empty()) {
        anchors.indices = text;
        anchors.fallback = true;
    }
    return anchors;
}

ImportanceScores importance_scores(const Matrix2D& a_prune, const AnchorSet& anchors, const SequenceLayout& layout) {
    if (a_prune.rows() != layout.size() || a_prune.cols() != layout.size()) {
        throw ShapeError("importance_scores: attention " + a_prune.shape_string() + " for a " +
                         std::to_string(layout.size()) + "-token layout");
    }
    if (anchors.indices.empty()) {
        throw ContractViolation("importance_scores: empty anchor set");
    }
    ImportanceScores s;
    s.rows = layout.visual_indices();
    s.scores.assign(s.rows.size(), 0.0);
    for (std::size_t t : anchors.indices) {
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            s.scores[i] += a_prune(t, s.rows[i]);
        }
    }
    for (double& v : s.scores) {
        v /= static_cast<double>(anchors.indices.size());
    }
    return s;
}

std::vector<std::size_t> top_k_positions(std::span<const double> values, std::size_t k) {
    if (k > values.size()) {
        throw BudgetError("top_k: k = " + std::to_string(k) + " exceeds " + std::to_string(values.size()) +
                          " candidates");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) {
            return values[a] > values[b];
        }
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
    order.resize(k);
    return order;
}

std::vector<std::size_t> global_top_k(const ImportanceScores& s, std::size_t k) {
    std::vector<std::size_t> rows;
    for (std::size_t p : top_k_positions(s.scores, k)) {
        rows.push_back(s.rows[p]);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::vector<double> diversity_scores(const Matrix2D& h, std::span<const std::size_t> candidates,
                                     const SequenceLayout& layout) {
    std::map<std::size_t, std::vector<std::size_t>> by_view;  // view -> positions into candidates
    for (std::size_t p = 0; p < candidates.size(); ++p) {
        const auto& tok = layout[candidates[p]];
        if (tok.modality != Modality::visual || !tok.view_id) {
            throw PreconditionError("diversity_scores: candidate row " + std::to_string(candidates[p]) +
                                    " is not a visual token");
        }
        by_view[*tok.view_id].push_back(p);
    }
    std::vector<double> d(candidates.size(), 1.0);
    for (const auto& [view, members] : by_view) {
        const std::size_t n = members.size();
        if (n < 2) {
            continue;
        }
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) {
            rows[i] = candidates[members[i]];
        }
        const CosineSimilarity cs = cosine_sim_matrix(h.select_rows(rows));
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    sum += cs.sim(i, j);
                }
            }
            d[members[i]] = 1.0 - sum / static_cast<double>(n - 1);
        }
    }
    return d;
}

std::vector<std::size_t> recycle_select(std::span<const double> d, std::size_t k) {
    auto picked = top_k_positions(d, k);
    std::sort(picked.begin(), picked.end());
    return picked;
}

PruneDecision select_with_recycling(const Matrix2D& h, const ImportanceScores& scores, const AnchorSet& anchors,
                                    const SequenceLayout& layout, const PruneConfig& cfg) {
    const Budget b = compute_budget(scores.rows.size(), cfg.pruning_rate, cfg.recycle_fraction);
    PruneDecision dec;
    dec.budget = b.budget;
    dec.top_k = b.top_k;
    dec.anchors = anchors.indices;
    dec.anchor_threshold = anchors.threshold;
    dec.importance = scores.scores;
    dec.global = global_top_k(scores, b.top_k);

    std::set_difference(scores.rows.begin(), scores.rows.end(), dec.global.begin(), dec.global.end(),
                        std::back_inserter(dec.candidates));
    dec.recycle_k = std::min(b.recycle_k, dec.candidates.size());
    dec.diversity = diversity_scores(h, dec.candidates, layout);
    for (std::size_t p : recycle_select(dec.diversity, dec.recycle_k)) {
        dec.recycle.push_back(dec.candidates[p]);
    }
    std::set_union(dec.global.begin(), dec.global.end(), dec.recycle.begin(), dec.recycle.end(),
                   std::back_inserter(dec.final));
    return dec;
}

PruneDecision ilsa_step(const Matrix2D& h, const Matrix2D& a_prune, const SequenceLayout& layout,
                        const PruneConfig& cfg) {
    cfg.validate();
    const AnchorSet anchors = select_text_anchors(h, layout);
    return select_with_recycling(h, importance_scores(a_prune, anchors, layout), anchors, layout, cfg);
}

Sparsifier make_ilsa_sparsifier(PruneConfig cfg) {
    return [cfg = std::move(cfg)](const SparsifyRequest& req) {
        return ilsa_step(req.attention_input, req.scoring_weights, req.layout, cfg);
    };
}

}  // namespace tokenadapt
