// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "tokenadapt/attention.hpp"
#include "tokenadapt/errors.hpp"
#include "tokenadapt/ilsa.hpp"

using namespace tokenadapt;

namespace {

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

Matrix2D row_stochastic(Rng& rng, std::size_t n) { return softmax_rows(oracle::random_matrix(rng, n, n, 2.0)); }

}  // namespace

TEST(Budget, ReferenceScaleExample) {
    const Budget b = compute_budget(3456, 0.35, 0.10);
    EXPECT_EQ(b.budget, 2246u);
    EXPECT_EQ(b.top_k, 2021u);
    EXPECT_EQ(b.recycle_k, 225u);
}

TEST(Budget, EdgeCases) {
    EXPECT_EQ(compute_budget(20, 0.0, 0.0), (Budget{20, 20, 0}));
    EXPECT_EQ(compute_budget(20, 0.0, 0.1), (Budget{20, 18, 2}));
    EXPECT_EQ(compute_budget(10, 0.0, 0.1), (Budget{10, 9, 1}));  // 0.9 * 10 floors to 9, not 8
    EXPECT_EQ(compute_budget(10, 0.99, 0.1), (Budget{1, 0, 1}));  // clamped to one token
    EXPECT_EQ(compute_budget(5, 0.5, 0.0).budget, 3u);            // 2.5 rounds away from zero
    EXPECT_THROW(compute_budget(0, 0.5, 0.1), PreconditionError);
}

TEST(Budget, AlwaysExact) {
    for (std::size_t v = 1; v <= 400; v += 7) {
        for (double r : {0.0, 0.1, 0.35, 0.6, 0.85, 0.99}) {
            for (double rho : {0.0, 0.1, 0.25, 1.0}) {
                const Budget b = compute_budget(v, r, rho);
                EXPECT_GE(b.budget, 1u);
                EXPECT_LE(b.budget, v);
                EXPECT_EQ(b.top_k + b.recycle_k, b.budget);
            }
        }
    }
}

TEST(PruneConfig, Validation) {
    EXPECT_THROW((PruneConfig{1.0, 0.1, {}}).validate(), PreconditionError);
    EXPECT_THROW((PruneConfig{-0.1, 0.1, {}}).validate(), PreconditionError);
    EXPECT_THROW((PruneConfig{0.3, 1.5, {}}).validate(), PreconditionError);
    EXPECT_THROW((PruneConfig{0.3, 0.1, {2, 2}}).validate(), PreconditionError);
    EXPECT_NO_THROW((PruneConfig{0.0, 0.0, {0, 3}}).validate());
}

TEST(Anchors, IdenticalTextTokensFallBackToAll) {
    const SequenceLayout layout = oracle::make_layout({3}, 2);
    Matrix2D h{{1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}, {0.5, 0.5}};
    const AnchorSet a = select_text_anchors(h, layout);
    EXPECT_TRUE(a.fallback);
    EXPECT_EQ(a.indices, (std::vector<std::size_t>{3, 4}));
}

TEST(Anchors, SingleTextTokenIsTheAnchor) {
    const SequenceLayout layout = oracle::make_layout({4}, 1);
    Rng rng(RngSeed{1});
    const AnchorSet a = select_text_anchors(oracle::random_matrix(rng, 5, 3), layout);
    EXPECT_EQ(a.indices, std::vector<std::size_t>{4});
    EXPECT_NEAR(a.alignment[0], 1.0, 1e-15);
}

TEST(Anchors, AlignedTokenSelectedAndMatchesDirectFormula) {
    // 4 visual, 4 text; text 0 is the mean of the visual tokens, the rest random.
    const SequenceLayout layout = oracle::make_layout({4}, 4);
    Rng rng(RngSeed{2});
    Matrix2D h = oracle::random_matrix(rng, 8, 6);
    for (std::size_t c = 0; c < 6; ++c) {
        h(4, c) = 0.0;
        for (std::size_t v = 0; v < 4; ++v) {
            h(v, c) += 2.0;
            h(4, c) += h(v, c) / 4.0;
        }
    }
    const AnchorSet a = select_text_anchors(h, layout);
    EXPECT_NE(std::find(a.indices.begin(), a.indices.end(), 4u), a.indices.end());
    const auto brute = oracle::ilsa(h, Matrix2D(8, 8, 1.0 / 8.0), layout, 0.5, 0.0);
    EXPECT_EQ(as_set(a.indices), brute.anchors);
}

TEST(Anchors, Preconditions) {
    EXPECT_THROW(select_text_anchors(Matrix2D(3, 2), oracle::make_layout({3}, 0)), PreconditionError);
    EXPECT_THROW(select_text_anchors(Matrix2D(2, 2), oracle::make_layout({0}, 2)), PreconditionError);
    EXPECT_THROW(select_text_anchors(Matrix2D(4, 2), oracle::make_layout({3}, 2)), ShapeError);
}

TEST(Importance, SingleAnchorReadsItsRow) {
    const SequenceLayout layout = oracle::make_layout({5}, 2, 1);
    Rng rng(RngSeed{3});
    const Matrix2D a = row_stochastic(rng, 8);
    AnchorSet anchors;
    anchors.indices = {7};
    const ImportanceScores s = importance_scores(a, anchors, layout);
    ASSERT_EQ(s.rows, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(s.scores[i], a(7, i + 1));
    }
}

TEST(Importance, IdenticalAnchorRowsGiveThatRow) {
    const SequenceLayout layout = oracle::make_layout({4}, 3);
    Rng rng(RngSeed{4});
    Matrix2D a = row_stochastic(rng, 7);
    for (std::size_t j = 0; j < 7; ++j) {
        a(5, j) = a(4, j);
        a(6, j) = a(4, j);
    }
    AnchorSet anchors;
    anchors.indices = {4, 5, 6};
    const ImportanceScores s = importance_scores(a, anchors, layout);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(s.scores[i], a(4, i), 1e-15);
    }
}

TEST(Importance, MatchesLoopOracle) {
    const SequenceLayout layout = oracle::make_layout({4, 4}, 4);
    Rng rng(RngSeed{5});
    const Matrix2D a = row_stochastic(rng, 12);
    AnchorSet anchors;
    anchors.indices = {8, 10, 11};
    const ImportanceScores s = importance_scores(a, anchors, layout);
    for (std::size_t i = 0; i < 8; ++i) {
        const double expect = (a(8, i) + a(10, i) + a(11, i)) / 3.0;
        EXPECT_NEAR(s.scores[i], expect, 1e-12);
        EXPECT_GE(s.scores[i], 0.0);
        EXPECT_LE(s.scores[i], 1.0);
    }
    AnchorSet empty;
    EXPECT_THROW(importance_scores(a, empty, layout), ContractViolation);
}

TEST(TopK, FullEmptyAndOverflow) {
    ImportanceScores s{{1, 3, 5}, {0.2, 0.9, 0.4}};
    EXPECT_EQ(global_top_k(s, 3), (std::vector<std::size_t>{1, 3, 5}));
    EXPECT_TRUE(global_top_k(s, 0).empty());
    EXPECT_EQ(global_top_k(s, 1), std::vector<std::size_t>{3});
    EXPECT_THROW(global_top_k(s, 4), BudgetError);
}

TEST(TopK, MatchesFullSortWithTies) {
    Rng rng(RngSeed{6});
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> vals(30);
        for (double& v : vals) {
            v = static_cast<double>(rng.below(6)) / 5.0;  // many ties
        }
        const std::size_t k = rng.below(31);
        EXPECT_EQ(top_k_positions(vals, k), oracle::sort_top(vals, k));
    }
}

TEST(Diversity, IdenticalCandidatesScoreZero) {
    const SequenceLayout layout = oracle::make_layout({2}, 1);
    const Matrix2D h{{1, 2}, {1, 2}, {0, 1}};
    const std::vector<std::size_t> cand{0, 1};
    const auto d = diversity_scores(h, cand, layout);
    EXPECT_NEAR(d[0], 0.0, 1e-15);
    EXPECT_NEAR(d[1], 0.0, 1e-15);
}

TEST(Diversity, OrthogonalCandidateScoresOne) {
    const SequenceLayout layout = oracle::make_layout({3}, 1);
    const Matrix2D h{{1, 0, 0}, {0, 1, 1}, {0, 2, -1}, {1, 1, 1}};
    const std::vector<std::size_t> cand{0, 1, 2};
    EXPECT_NEAR(diversity_scores(h, cand, layout)[0], 1.0, 1e-15);
}

TEST(Diversity, SingleCandidateViewScoresOne) {
    const SequenceLayout layout = oracle::make_layout({2, 2}, 1);
    Rng rng(RngSeed{7});
    const Matrix2D h = oracle::random_matrix(rng, 5, 4);
    const std::vector<std::size_t> cand{0, 2, 3};
    EXPECT_EQ(diversity_scores(h, cand, layout)[0], 1.0);
}

TEST(Diversity, MatchesPairwiseOracleWithinViews) {
    const SequenceLayout layout = oracle::make_layout({5, 4}, 1);
    Rng rng(RngSeed{8});
    const Matrix2D h = oracle::random_matrix(rng, 10, 6);
    const std::vector<std::size_t> cand{0, 1, 2, 3, 4, 6, 8};
    const auto d = diversity_scores(h, cand, layout);
    for (std::size_t i = 0; i < cand.size(); ++i) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t j = 0; j < cand.size(); ++j) {
            if (j != i && layout[cand[i]].view_id == layout[cand[j]].view_id) {
                sum += oracle::cosine(h.row(cand[i]), h.row(cand[j]));
                ++n;
            }
        }
        EXPECT_NEAR(d[i], 1.0 - sum / static_cast<double>(n), 1e-12);
    }
    const std::vector<std::size_t> bad{9};
    EXPECT_THROW(diversity_scores(h, bad, layout), PreconditionError);
}

TEST(Recycle, SelectsGlobalTopK) {
    const std::vector<double> d{0.3, 0.9, 0.1, 0.9, 0.5};
    EXPECT_TRUE(recycle_select(d, 0).empty());
    EXPECT_EQ(recycle_select(d, 2), (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(recycle_select(d, 3), (std::vector<std::size_t>{1, 3, 4}));
    EXPECT_THROW(recycle_select(d, 6), BudgetError);
}

TEST(IlsaStep, TwoViewInstanceMatchesBruteForce) {
    const SequenceLayout layout = oracle::make_layout({4, 4}, 3);
    Rng rng(RngSeed{9});
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix2D h = oracle::random_matrix(rng, 11, 6);
        const Matrix2D a = row_stochastic(rng, 11);
        const double r = rng.uniform(0.0, 0.9);
        const double rho = rng.uniform(0.0, 0.5);
        const PruneDecision d = ilsa_step(h, a, layout, {r, rho, {}});
        const auto brute = oracle::ilsa(h, a, layout, r, rho);
        EXPECT_EQ(as_set(d.anchors), brute.anchors);
        EXPECT_EQ(as_set(d.global), brute.global);
        EXPECT_EQ(as_set(d.recycle), brute.recycle);
        EXPECT_EQ(as_set(d.final), brute.final);
    }
}

TEST(IlsaStep, NoPruningKeepsEveryVisualToken) {
    const SequenceLayout layout = oracle::make_layout({6, 4}, 3);
    Rng rng(RngSeed{10});
    const Matrix2D h = oracle::random_matrix(rng, 13, 6);
    const Matrix2D a = row_stochastic(rng, 13);
    const auto visual = layout.visual_indices();
    const PruneDecision none = ilsa_step(h, a, layout, {0.0, 0.0, {}});
    EXPECT_EQ(none.final, visual);
    EXPECT_TRUE(none.recycle.empty());
    const PruneDecision with_recycle = ilsa_step(h, a, layout, {0.0, 0.1, {}});
    EXPECT_EQ(with_recycle.final, visual);
    EXPECT_EQ(with_recycle.recycle.size(), 1u);  // K = 9 of 10, the complement is recycled
}

TEST(IlsaStep, DecisionInvariants) {
    const SequenceLayout layout = oracle::make_layout({7, 5, 6}, 4, 2);
    Rng rng(RngSeed{11});
    for (double r : {0.1, 0.35, 0.6, 0.85}) {
        for (double rho : {0.0, 0.1, 0.25}) {
            const Matrix2D h = oracle::random_matrix(rng, layout.size(), 8);
            const Matrix2D a = row_stochastic(rng, layout.size());
            const PruneDecision d = ilsa_step(h, a, layout, {r, rho, {}});
            const Budget b = compute_budget(18, r, rho);
            EXPECT_EQ(d.final.size(), b.budget);
            EXPECT_EQ(d.global.size(), b.top_k);
            EXPECT_EQ(d.recycle.size(), b.recycle_k);
            std::vector<std::size_t> both;
            std::set_intersection(d.global.begin(), d.global.end(), d.recycle.begin(), d.recycle.end(),
                                  std::back_inserter(both));
            EXPECT_TRUE(both.empty());
            for (std::size_t i : d.final) {
                EXPECT_EQ(layout[i].modality, Modality::visual);
            }
            EXPECT_EQ(d.importance.size(), 18u);
            EXPECT_EQ(d.candidates.size(), d.diversity.size());
        }
    }
}

TEST(IlsaStep, InvariantUnderPositionShiftThroughScoringPath) {
    ArchSpec spec;
    spec.num_layers = 1;
    spec.d_model = 16;
    spec.num_heads = 2;
    spec.head_dim = 8;
    spec.ffn_dim = 16;
    const LayerWeights w = init_layer_weights(spec, Rng(RngSeed{12}), WeightInit{0.3, 0.0});
    const SequenceLayout layout = oracle::make_layout({6, 6}, 3);
    Rng rng(RngSeed{13});
    const Matrix2D h = oracle::random_matrix(rng, layout.size(), 16);
    const PruneConfig cfg{0.5, 0.1, {}};
    const auto base_pos = layout.positions();
    const PruneDecision base =
        ilsa_step(h, *attention_forward(h, w, spec, base_pos, true).scoring_weights, layout, cfg);
    for (std::size_t shift : {1u, 17u, 256u}) {
        const SequenceLayout moved = layout.shifted(shift);
        const auto pos = moved.positions();
        EXPECT_EQ(ilsa_step(h, *attention_forward(h, w, spec, pos, true).scoring_weights, moved, cfg), base);
    }
}
