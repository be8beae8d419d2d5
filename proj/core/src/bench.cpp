// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "json_io.hpp"
#include "tokenadapt/baselines.hpp"
#include "tokenadapt/errors.hpp"

namespace tokenadapt {

using detail::Json;

namespace {

RngSeed derived_seed(std::uint64_t weight_seed, const char* tag) {
    return RngSeed{Rng(RngSeed{weight_seed}).split(tag).next_u64()};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

StrategyResult score(std::string name, std::vector<std::size_t> retained, const SparseLayerCapture& cap,
                     const std::vector<std::size_t>& planted) {
    StrategyResult r;
    r.name = std::move(name);
    r.retained = std::move(retained);
    r.recall = salient_recall(r.retained, planted);
    r.coverage = view_coverage(r.retained, cap.layout);
    r.diversity = pairwise_diversity(cap.attention_input, r.retained);
    return r;
}

Json waypoints_json(const Trajectory& t) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < t.steps(); ++i) {
        rows.push_back({t.waypoints(i, 0), t.waypoints(i, 1), t.waypoints(i, 2)});
    }
    return rows;
}

Json counter_json(const OpCounter& c) {
    return {{"projection_macs", c.projection_macs},
            {"score_macs", c.score_macs},
            {"value_macs", c.value_macs},
            {"ffn_macs", c.ffn_macs},
            {"scoring_macs", c.scoring_macs},
            {"total_macs", c.total()}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

}  // namespace

ModelBundle build_model(const Config& cfg) {
    ModelBundle m;
    m.decoder = init_model_weights(cfg.arch, RngSeed{cfg.weight_seed}, cfg.init);
    m.tfm = init_tfm_weights(cfg.tfm, cfg.scenario.history_frames, derived_seed(cfg.weight_seed, "tfm"),
                             cfg.init.stddev);
    m.adapter = init_adapter(cfg.tfm.dim, cfg.arch.d_model, derived_seed(cfg.weight_seed, "adapter"),
                             cfg.init.stddev);
    m.planner = init_planner_weights(cfg.planner, cfg.arch.d_model, derived_seed(cfg.weight_seed, "planner"),
                                     cfg.init.stddev);
    return m;
}

SparseLayerCapture capture_first_sparse_layer(const Matrix2D& embeddings, const SequenceLayout& layout,
                                              const ArchSpec& spec, const std::vector<LayerWeights>& weights) {
    spec.validate();
    if (spec.sparse_layers.empty()) {
        throw PreconditionError("capture_first_sparse_layer: no sparse layer configured");
    }
    const std::size_t target = spec.sparse_layers.front();
    const std::vector<double> positions = layout.positions();
    Matrix2D h = embeddings;
    for (std::size_t l = 0; l < target; ++l) {
        h = decoder_layer_forward(h, weights[l], spec, positions, false, nullptr).hidden;
    }
    LayerOutput lo = decoder_layer_forward(h, weights[target], spec, positions, true, nullptr);
    return SparseLayerCapture{target, std::move(lo.attention_input), std::move(*lo.scoring_weights),
                              std::move(*lo.causal_weights), layout};
}

SeedResult run_seed(const Config& cfg, const ModelBundle& model, std::uint64_t seed) {
    const Scenario s = generate_scenario(seed, cfg.scenario);
    const Matrix2D emb = assemble_embeddings(s, cfg.tfm, model.tfm, model.adapter);
    const SparseLayerCapture cap = capture_first_sparse_layer(emb, s.layout, cfg.arch, model.decoder);
    const std::vector<std::size_t> visual = cap.layout.visual_indices();
    const Budget budget = compute_budget(visual.size(), cfg.prune.pruning_rate, cfg.prune.recycle_fraction);

    SeedResult out;
    out.seed = seed;
    out.planted_rows = s.planted_rows;

    PruneDecision ilsa = ilsa_step(cap.attention_input, cap.scoring_weights, cap.layout, cfg.prune);
    const ImportanceScores scores{visual, ilsa.importance};
    PruneDecision positional = baseline_positional(cap.attention_input, cap.causal_weights, cap.layout, cfg.prune);

    StrategyResult r = score("ilsa", ilsa.final, cap, s.planted_rows);
    r.decision = std::move(ilsa);
    out.strategies.push_back(std::move(r));
    out.strategies.push_back(score("random", baseline_random(cap.layout, budget.budget, seed), cap, s.planted_rows));
    out.strategies.push_back(
        score("per_view_average", baseline_per_view_average(scores, cap.layout, budget.budget), cap, s.planted_rows));
    r = score("positional", positional.final, cap, s.planted_rows);
    r.decision = std::move(positional);
    out.strategies.push_back(std::move(r));
    out.strategies.push_back(score("global_topk", baseline_global_topk(scores, budget.budget), cap, s.planted_rows));
    return out;
}

BenchReport run_bench(const Config& cfg) {
    BenchReport report;
    report.config = cfg;

    const Scenario probe = generate_scenario(cfg.bench.base_seed, cfg.scenario);
    const FlopsArchAssumptions desk = assumptions_for(cfg.arch, probe.layout);
    report.dense = dense_flops(desk);
    report.pruned = pruned_flops(desk, cfg.prune);
    report.flops_ratio = reduction_ratio(report.dense, report.pruned);

    const std::size_t n = cfg.bench.seeds;
    if (n > 0) {
        const ModelBundle model = build_model(cfg);
        report.seeds.resize(n);
        std::size_t threads = cfg.bench.threads == 0 ? std::thread::hardware_concurrency() : cfg.bench.threads;
        threads = std::clamp<std::size_t>(threads, 1, n);
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    report.seeds[i] = run_seed(cfg, model, cfg.bench.base_seed + i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < threads; ++t) {
                pool.emplace_back(worker);
            }
            for (auto& t : pool) {
                t.join();
            }
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    for (std::size_t k = 0; k < kStrategyNames.size() && !report.seeds.empty(); ++k) {
        std::vector<double> recall, coverage, diversity;
        for (const auto& seed : report.seeds) {
            recall.push_back(seed.strategies[k].recall);
            coverage.push_back(seed.strategies[k].coverage);
            diversity.push_back(seed.strategies[k].diversity);
        }
        report.summary.push_back(
            StrategySummary{kStrategyNames[k], mean_std(recall), mean_std(coverage), mean_std(diversity)});
    }
    return report;
}

std::string bench_report_json(const BenchReport& r) {
    Json j;
    j["format"] = "tokenadapt-bench v1";
    j["config"] = detail::config_json(r.config);
    const LayerMacs dm = r.dense.total_macs();
    const LayerMacs pm = r.pruned.total_macs();
    j["flops"] = {{"dense_total_flops", r.dense.total_flops},
                  {"pruned_total_flops", r.pruned.total_flops},
                  {"ratio", r.flops_ratio},
                  {"dense_macs", dm.total()},
                  {"pruned_macs", pm.total()}};
    Json summary = Json::array();
    for (const auto& s : r.summary) {
        summary.push_back({{"strategy", s.name},
                           {"recall", {{"mean", s.recall.mean}, {"std", s.recall.std}}},
                           {"coverage", {{"mean", s.coverage.mean}, {"std", s.coverage.std}}},
                           {"diversity", {{"mean", s.diversity.mean}, {"std", s.diversity.std}}}});
    }
    j["summary"] = std::move(summary);
    Json seeds = Json::array();
    for (const auto& seed : r.seeds) {
        Json strategies = Json::array();
        for (const auto& st : seed.strategies) {
            Json e = {{"strategy", st.name},
                      {"recall", st.recall},
                      {"coverage", st.coverage},
                      {"diversity", st.diversity},
                      {"retained", st.retained}};
            if (st.decision) {
                e["decision"] = detail::decision_json(*st.decision);
            }
            strategies.push_back(std::move(e));
        }
        seeds.push_back({{"seed", seed.seed}, {"planted", seed.planted_rows}, {"strategies", std::move(strategies)}});
    }
    j["seeds"] = std::move(seeds);
    return j.dump(2) + "\n";
}

std::string bench_summary_csv(const BenchReport& r) {
    std::string out = "strategy,metric,mean,std\n";
    for (const auto& s : r.summary) {
        const std::pair<const char*, const MeanStd*> rows[] = {
            {"recall", &s.recall}, {"coverage", &s.coverage}, {"diversity", &s.diversity}};
        for (const auto& [metric, ms] : rows) {
            out += s.name + "," + metric + "," + fmt(ms->mean) + "," + fmt(ms->std) + "\n";
        }
    }
    return out;
}

std::string bench_seeds_csv(const BenchReport& r) {
    std::string out = "seed,strategy,recall,coverage,diversity,retained\n";
    for (const auto& seed : r.seeds) {
        for (const auto& st : seed.strategies) {
            out += std::to_string(seed.seed) + "," + st.name + "," + fmt(st.recall) + "," + fmt(st.coverage) + "," +
                   fmt(st.diversity) + "," + std::to_string(st.retained.size()) + "\n";
        }
    }
    return out;
}

void write_bench_reports(const BenchReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "report.json", bench_report_json(r));
    write_text(dir / "summary.csv", bench_summary_csv(r));
    write_text(dir / "per_seed.csv", bench_seeds_csv(r));
}

ForwardResult run_forward(const Config& cfg, std::uint64_t seed, const TrajectoryRefiner& refiner) {
    const ModelBundle model = build_model(cfg);
    ForwardResult r;
    r.scenario = generate_scenario(seed, cfg.scenario);
    const Matrix2D emb = assemble_embeddings(r.scenario, cfg.tfm, model.tfm, model.adapter);
    r.output = model_forward(emb, r.scenario.layout, cfg.arch, model.decoder, make_ilsa_sparsifier(cfg.prune),
                             &r.counter);
    r.trajectory = refiner(decode_trajectory(r.output.hidden, cfg.planner, model.planner));
    r.loss = composite_loss(r.trajectory, r.scenario.ground_truth, cfg.planner.loss);
    return r;
}

std::string forward_report_json(const Config& cfg, const ForwardResult& r) {
    Json j;
    j["format"] = "tokenadapt-forward v1";
    j["seed"] = r.scenario.seed;
    j["config"] = detail::config_json(cfg);
    j["sequence_length"] = r.scenario.layout.size();
    j["final_length"] = r.output.layout.size();
    j["planted"] = r.scenario.planted_rows;
    j["macs"] = counter_json(r.counter);
    Json trace = Json::array();
    for (const auto& e : r.output.trace) {
        trace.push_back({{"layer", e.layer},
                         {"length_before", e.length_before},
                         {"length_after", e.length_after},
                         {"decision", detail::decision_json(e.decision)}});
    }
    j["trace"] = std::move(trace);
    j["trajectory"] = waypoints_json(r.trajectory);
    j["ground_truth"] = waypoints_json(r.scenario.ground_truth);
    j["loss"] = {{"traj", r.loss.traj},
                 {"lateral", r.loss.lateral},
                 {"velocity", r.loss.velocity},
                 {"endpoint", r.loss.endpoint},
                 {"total", r.loss.total}};
    return j.dump(2) + "\n";
}

}  // namespace tokenadapt
