// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tokenadapt/errors.hpp"
#include "tokenadapt/flops.hpp"
#include "tokenadapt/ilsa.hpp"
#include "tokenadapt/model.hpp"

using namespace tokenadapt;

namespace {

FlopsArchAssumptions unit_arch() {
    FlopsArchAssumptions a;
    a.num_layers = 1;
    a.d_model = 1;
    a.num_heads = 1;
    a.ffn_dim = 1;
    a.views = 1;
    a.llm_visual_tokens = 1;
    a.text_tokens = 0;
    a.frontend_flops = 0.0;
    return a;
}

FlopsArchAssumptions mid_arch(std::size_t visual, std::size_t text = 16) {
    FlopsArchAssumptions a;
    a.num_layers = 6;
    a.d_model = 64;
    a.num_heads = 4;
    a.ffn_dim = 128;
    a.llm_visual_tokens = visual;
    a.text_tokens = text;
    a.frontend_flops = 1e6;
    return a;
}

}  // namespace

TEST(Flops, UnitHandCount) {
    // L = d = ffn = 1: 4 projection + 1 score + 1 value + 3 ffn MACs, 2 FLOPs each,
    // plus softmax 5, gate 5, two norms 8, RoPE on q and k 6, two residual adds 2.
    const FlopsReport r = dense_flops(unit_arch());
    ASSERT_EQ(r.layers.size(), 1u);
    EXPECT_EQ(r.layers[0].macs.total(), 9u);
    EXPECT_DOUBLE_EQ(r.llm_flops, 18.0 + 5.0 + 5.0 + 8.0 + 6.0 + 2.0);
    EXPECT_DOUBLE_EQ(r.total_flops, r.llm_flops);
    EXPECT_EQ(r.eager_overhead_flops, 0.0);
}

TEST(Flops, LayerMacsFormula) {
    FlopsArchAssumptions a = mid_arch(100);
    const LayerMacs m = layer_macs(a, 116, true, 100, 16);
    EXPECT_EQ(m.projection, 4u * 116 * 64 * 64);
    EXPECT_EQ(m.score, 116u * 116 * 64);
    EXPECT_EQ(m.value, 116u * 116 * 64);
    EXPECT_EQ(m.ffn, 3u * 116 * 64 * 128);
    EXPECT_EQ(m.scoring, 116u * 116 * 64);
    EXPECT_EQ(m.anchor, 100u * 16 * 64);
    const LayerMacs dense = layer_macs(a, 116, false, 100, 16);
    EXPECT_EQ(dense.scoring, 0u);
    EXPECT_EQ(dense.anchor, 0u);
}

TEST(Flops, DoublingLengthQuadruplesScoreTerm) {
    const FlopsArchAssumptions a = mid_arch(100);
    const LayerMacs one = layer_macs(a, 200, false, 0, 0);
    const LayerMacs two = layer_macs(a, 400, false, 0, 0);
    EXPECT_EQ(two.score, 4 * one.score);
    EXPECT_EQ(two.value, 4 * one.value);
    EXPECT_EQ(two.projection, 2 * one.projection);
    EXPECT_EQ(two.ffn, 2 * one.ffn);
}

TEST(Flops, ReferenceDenseTotal) {
    const FlopsArchAssumptions a = reference_7b_assumptions();
    const FlopsReport d = dense_flops(a);
    EXPECT_NEAR(d.total_flops / kReferenceDenseFlops, 1.0, 1e-12);
    EXPECT_GT(*a.frontend_flops, 0.0);
    EXPECT_NEAR(d.llm_flops / kReferenceDenseFlops, 1.0, 0.10);
    FlopsArchAssumptions too_big;
    too_big.llm_visual_tokens = 3456;
    EXPECT_THROW(calibrate_frontend(too_big, kReferenceDenseFlops), PreconditionError);
}

TEST(Flops, NoPruningCostsDenseDplusOverhead) {
    const FlopsArchAssumptions a = mid_arch(300);
    const FlopsReport d = dense_flops(a);
    const FlopsReport p = pruned_flops(a, {0.0, 0.1, {2}});
    EXPECT_GT(p.eager_overhead_flops, 0.0);
    EXPECT_NEAR(p.total_flops, d.total_flops + p.eager_overhead_flops, 1e-6 * d.total_flops);
    EXPECT_GT(reduction_ratio(d, p), 1.0);
}

TEST(Flops, MonotoneInPruningRate) {
    const FlopsArchAssumptions a = mid_arch(400);
    double prev = pruned_flops(a, {0.0, 0.1, {1}}).total_flops;
    for (double r : {0.1, 0.2, 0.35, 0.5, 0.6, 0.75, 0.85, 0.95}) {
        const double cur = pruned_flops(a, {r, 0.1, {1}}).total_flops;
        EXPECT_LE(cur, prev) << r;
        prev = cur;
    }
}

TEST(Flops, EarlierSparseLayerSavesMore) {
    const FlopsArchAssumptions a = mid_arch(400);
    double prev = 0.0;
    for (std::size_t layer = 0; layer < a.num_layers; ++layer) {
        const double cur = pruned_flops(a, {0.5, 0.1, {layer}}).total_flops;
        EXPECT_GE(cur, prev) << layer;
        prev = cur;
    }
}

TEST(Flops, SameBudgetGivesSamePostSparseCost) {
    // V = 1000 at r = 0.5 and V = 2000 at r = 0.75 both keep B = 500.
    const FlopsReport a = pruned_flops(mid_arch(1000), {0.5, 0.1, {2}});
    const FlopsReport b = pruned_flops(mid_arch(2000), {0.75, 0.1, {2}});
    for (std::size_t l = 3; l < 6; ++l) {
        EXPECT_EQ(a.layers[l].length, 516u);
        EXPECT_EQ(a.layers[l].total(), b.layers[l].total());
    }
    EXPECT_LT(a.layers[2].total(), b.layers[2].total());
}

TEST(Flops, MultipleSparseLayersCompound) {
    const FlopsReport p = pruned_flops(mid_arch(1000), {0.5, 0.1, {1, 3}});
    EXPECT_EQ(p.layers[1].visual, 1000u);
    EXPECT_EQ(p.layers[2].visual, 500u);
    EXPECT_EQ(p.layers[4].visual, 250u);
    EXPECT_THROW(pruned_flops(mid_arch(10), {0.5, 0.1, {6}}), PreconditionError);
}

TEST(Flops, AnalyticCountMatchesInstrumentedForward) {
    ArchSpec spec;
    spec.num_layers = 4;
    spec.d_model = 16;
    spec.num_heads = 2;
    spec.head_dim = 8;
    spec.ffn_dim = 24;
    spec.sparse_layers = {1};
    const auto weights = init_model_weights(spec, RngSeed{1}, {0.1, 1.0});
    const SequenceLayout layout = oracle::make_layout({10, 10}, 5, 1);
    Rng rng(RngSeed{2});
    const Matrix2D x = oracle::random_matrix(rng, layout.size(), 16);
    const PruneConfig cfg{0.35, 0.1, {1}};
    OpCounter counter;
    model_forward(x, layout, spec, weights, make_ilsa_sparsifier(cfg), &counter);
    const LayerMacs m = pruned_flops(assumptions_for(spec, layout), cfg).total_macs();
    EXPECT_EQ(counter.projection_macs, m.projection);
    EXPECT_EQ(counter.score_macs, m.score);
    EXPECT_EQ(counter.value_macs, m.value);
    EXPECT_EQ(counter.ffn_macs, m.ffn);
    EXPECT_EQ(counter.scoring_macs, m.scoring);

    OpCounter dense_counter;
    model_forward(x, layout, spec, weights, {}, &dense_counter);
    const LayerMacs dm = dense_flops(assumptions_for(spec, layout)).total_macs();
    EXPECT_EQ(dense_counter.projection_macs, dm.projection);
    EXPECT_EQ(dense_counter.score_macs, dm.score);
    EXPECT_EQ(dense_counter.ffn_macs, dm.ffn);
}

TEST(Flops, StudyTablesAreConsistent) {
    const FlopsStudy s = flops_study(reference_7b_assumptions(), {0.35, 0.1, {4}});
    EXPECT_EQ(s.text_sensitivity.size(), 5u);
    EXPECT_EQ(s.sweep.size(), 9u);
    for (const auto& row : s.text_sensitivity) {
        EXPECT_LT(row.ratio, 1.0);
        EXPECT_GT(row.ratio, 0.0);
    }
    for (std::size_t i = 1; i < s.text_sensitivity.size(); ++i) {
        EXPECT_GT(s.text_sensitivity[i].dense_flops, s.text_sensitivity[i - 1].dense_flops);
    }
    EXPECT_NE(flops_study_json(s).find("tokenadapt-flops v1"), std::string::npos);
    EXPECT_EQ(flops_study_csv(s).rfind("section,key,dense_gflops,pruned_gflops,ratio", 0), 0u);
}
