// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <numeric>

#include "tokenadapt/attention.hpp"
#include "tokenadapt/bench.hpp"
#include "tokenadapt/config.hpp"
#include "tokenadapt/ilsa.hpp"
#include "tokenadapt/model.hpp"

using namespace tokenadapt;

namespace {

Matrix2D random_matrix(Rng& rng, std::size_t r, std::size_t c) {
    Matrix2D m(r, c);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

ArchSpec attention_spec() {
    ArchSpec s;
    s.num_layers = 1;
    s.d_model = 64;
    s.num_heads = 4;
    s.head_dim = 16;
    s.ffn_dim = 128;
    return s;
}

std::vector<double> iota_positions(std::size_t n) {
    std::vector<double> p(n);
    std::iota(p.begin(), p.end(), 0.0);
    return p;
}

void BM_AttentionMaterialized(benchmark::State& state) {
    const ArchSpec spec = attention_spec();
    const auto len = static_cast<std::size_t>(state.range(0));
    Rng rng(RngSeed{1});
    const LayerWeights w = init_layer_weights(spec, rng.split("w"), {0.05, 0.0});
    const Matrix2D x = random_matrix(rng, len, spec.d_model);
    const auto pos = iota_positions(len);
    for (auto _ : state) {
        benchmark::DoNotOptimize(attention_materialized(x, w, spec, pos));
    }
}
BENCHMARK(BM_AttentionMaterialized)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_AttentionStreaming(benchmark::State& state) {
    const ArchSpec spec = attention_spec();
    const auto len = static_cast<std::size_t>(state.range(0));
    Rng rng(RngSeed{1});
    const LayerWeights w = init_layer_weights(spec, rng.split("w"), {0.05, 0.0});
    const Matrix2D x = random_matrix(rng, len, spec.d_model);
    const auto pos = iota_positions(len);
    for (auto _ : state) {
        benchmark::DoNotOptimize(attention_streaming(x, w, spec, pos));
    }
}
BENCHMARK(BM_AttentionStreaming)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_IlsaStep(benchmark::State& state) {
    const Config cfg = default_config();
    const ModelBundle model = build_model(cfg);
    const Scenario s = generate_scenario(1, cfg.scenario);
    const Matrix2D emb = assemble_embeddings(s, cfg.tfm, model.tfm, model.adapter);
    const SparseLayerCapture cap = capture_first_sparse_layer(emb, s.layout, cfg.arch, model.decoder);
    const PruneConfig pc{static_cast<double>(state.range(0)) / 100.0, 0.1, {}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(ilsa_step(cap.attention_input, cap.scoring_weights, cap.layout, pc));
    }
}
BENCHMARK(BM_IlsaStep)->Arg(35)->Arg(85)->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
    const Config cfg = default_config();
    const ModelBundle model = build_model(cfg);
    const Scenario s = generate_scenario(1, cfg.scenario);
    const Matrix2D emb = assemble_embeddings(s, cfg.tfm, model.tfm, model.adapter);
    const bool pruned = state.range(0) != 0;
    const Sparsifier sp = pruned ? make_ilsa_sparsifier(cfg.prune) : Sparsifier{};
    for (auto _ : state) {
        benchmark::DoNotOptimize(model_forward(emb, s.layout, cfg.arch, model.decoder, sp));
    }
    state.SetLabel(pruned ? "ilsa r=0.35" : "dense");
}
BENCHMARK(BM_ModelForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
