// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/baselines.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

namespace {

void check_budget(std::size_t budget, std::size_t visual) {
    if (budget > visual) {
        throw BudgetError("baseline: budget " + std::to_string(budget) + " exceeds " + std::to_string(visual) +
                          " visual tokens");
    }
}

}  // namespace

std::vector<std::size_t> baseline_random(const SequenceLayout& layout, std::size_t budget, std::uint64_t seed) {
    std::vector<std::size_t> rows = layout.visual_indices();
    check_budget(budget, rows.size());
    Rng rng = Rng(RngSeed{seed}).split("random-baseline");
    for (std::size_t i = 0; i < budget; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(rows.size() - i));
        std::swap(rows[i], rows[j]);
    }
    rows.resize(budget);
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::vector<std::size_t> baseline_per_view_average(const ImportanceScores& s, const SequenceLayout& layout,
                                                   std::size_t budget) {
    check_budget(budget, s.rows.size());
    std::map<std::size_t, std::vector<std::size_t>> by_view;  // view -> positions into s
    for (std::size_t p = 0; p < s.rows.size(); ++p) {
        by_view[layout[s.rows[p]].view_id.value()].push_back(p);
    }
    std::vector<bool> taken(s.rows.size(), false);
    std::size_t used = 0;
    if (!by_view.empty()) {
        const std::size_t share = budget / by_view.size();
        for (const auto& [view, positions] : by_view) {
            std::vector<double> vals;
            vals.reserve(positions.size());
            for (std::size_t p : positions) {
                vals.push_back(s.scores[p]);
            }
            for (std::size_t q : top_k_positions(vals, std::min(share, positions.size()))) {
                taken[positions[q]] = true;
                ++used;
            }
        }
    }
    std::vector<std::size_t> free_positions;
    std::vector<double> free_scores;
    for (std::size_t p = 0; p < s.rows.size(); ++p) {
        if (!taken[p]) {
            free_positions.push_back(p);
            free_scores.push_back(s.scores[p]);
        }
    }
    for (std::size_t q : top_k_positions(free_scores, budget - used)) {
        taken[free_positions[q]] = true;
    }
    std::vector<std::size_t> out;
    out.reserve(budget);
    for (std::size_t p = 0; p < s.rows.size(); ++p) {
        if (taken[p]) {
            out.push_back(s.rows[p]);
        }
    }
    return out;
}

PruneDecision baseline_positional(const Matrix2D& h, const Matrix2D& causal_weights, const SequenceLayout& layout,
                                  const PruneConfig& cfg) {
    const AnchorSet anchors = select_text_anchors(h, layout);
    const ImportanceScores scores = importance_scores(causal_weights, anchors, layout);
    return select_with_recycling(h, scores, anchors, layout, cfg);
}

std::vector<std::size_t> baseline_global_topk(const ImportanceScores& s, std::size_t budget) {
    return global_top_k(s, budget);
}

}  // namespace tokenadapt
