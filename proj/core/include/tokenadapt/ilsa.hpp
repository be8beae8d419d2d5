// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "tokenadapt/arch.hpp"
#include "tokenadapt/model.hpp"
#include "tokenadapt/prune_decision.hpp"

namespace tokenadapt {

inline constexpr double kDefaultRecycleFraction = 0.10;

struct PruneConfig {
    /// Fraction of visual tokens removed at each sparse layer, in [0, 1).
    double pruning_rate = 0.35;
    /// Share of the retained budget filled by diversity recycling.
    double recycle_fraction = kDefaultRecycleFraction;
    std::vector<std::size_t> sparse_layers;

    void validate() const;
};

/// B = round((1 - r) |V|) clamped to >= 1, K = floor((1 - rho) B), k = B - K.
struct Budget {
    std::size_t budget = 0;
    std::size_t top_k = 0;
    std::size_t recycle_k = 0;

    friend bool operator==(const Budget&, const Budget&) = default;
};

Budget compute_budget(std::size_t visual_count, double pruning_rate, double recycle_fraction);

struct AnchorSet {
    std::vector<std::size_t> indices;  // text rows, ascending
    double threshold = 0.0;            // tau: mean alignment over text tokens
    std::vector<double> alignment;     // per text token, aligned with layout.text_indices()
    bool fallback = false;             // no token beat tau, so all text tokens are anchors
};

/// S = row-softmax(H_V H_T^T) over the text columns; alignment(t) is the mean of
/// column t; anchors are the text tokens with alignment strictly above the mean.
AnchorSet select_text_anchors(const Matrix2D& h, const SequenceLayout& layout);

struct ImportanceScores {
    std::vector<std::size_t> rows;  // visual rows, ascending
    std::vector<double> scores;     // s_i in [0, 1]
};

/// s_i = mean over anchors t of a_prune(t, i), for every visual row i.
ImportanceScores importance_scores(const Matrix2D& a_prune, const AnchorSet& anchors, const SequenceLayout& layout);

/// Positions of the k largest values; ties go to the smaller position. The
/// result is ordered by rank (best first).
std::vector<std::size_t> top_k_positions(std::span<const double> values, std::size_t k);

/// Rows of the K highest-scoring visual tokens, ascending. Throws BudgetError when K > |V|.
std::vector<std::size_t> global_top_k(const ImportanceScores& s, std::size_t k);

/// d_i = 1 - mean cosine(h_i, h_j) over the other candidates of the same view.
/// A candidate alone in its view scores 1. Aligned with `candidates`.
std::vector<double> diversity_scores(const Matrix2D& h, std::span<const std::size_t> candidates,
                                     const SequenceLayout& layout);

/// Positions (into d) of the k most diverse candidates. Throws BudgetError when k > d.size().
std::vector<std::size_t> recycle_select(std::span<const double> d, std::size_t k);

/// One full pruning-and-recycling step on the attention input `h` of a sparse layer.
PruneDecision ilsa_step(const Matrix2D& h, const Matrix2D& a_prune, const SequenceLayout& layout,
                        const PruneConfig& cfg);

/// Pruning and recycling from precomputed importance scores (shared by ILSA and
/// the positional baseline).
PruneDecision select_with_recycling(const Matrix2D& h, const ImportanceScores& scores, const AnchorSet& anchors,
                                    const SequenceLayout& layout, const PruneConfig& cfg);

Sparsifier make_ilsa_sparsifier(PruneConfig cfg);

}  // namespace tokenadapt
