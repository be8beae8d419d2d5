// SPDX-License-Identifier: Apache-2.0
// tokenadapt: forward / bench / flops / masks front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tokenadapt/bench.hpp"
#include "tokenadapt/config.hpp"
#include "tokenadapt/errors.hpp"
#include "tokenadapt/flops.hpp"
#include "tokenadapt/masks.hpp"

namespace fs = std::filesystem;
using namespace tokenadapt;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitContract = 3;

Config read_config(const std::string& path) { return path.empty() ? default_config() : load_config(path); }

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

int run_forward_cmd(const std::string& config_path, std::uint64_t seed, const fs::path& out) {
    const Config cfg = read_config(config_path);
    const ForwardResult r = run_forward(cfg, seed);
    write_file(out / "forward.json", forward_report_json(cfg, r));
    std::ofstream csv(out / "trajectory.csv", std::ios::binary);
    write_trajectory_csv(csv, r.trajectory);
    std::printf("seed %llu: %zu -> %zu tokens, loss %.6f\n", static_cast<unsigned long long>(seed),
                r.scenario.layout.size(), r.output.layout.size(), r.loss.total);
    return 0;
}

int run_bench_cmd(const std::string& config_path, std::optional<std::size_t> seeds,
                  std::optional<std::uint64_t> base_seed, std::optional<std::size_t> threads, const fs::path& out) {
    Config cfg = read_config(config_path);
    if (seeds) {
        cfg.bench.seeds = *seeds;
    }
    if (base_seed) {
        cfg.bench.base_seed = *base_seed;
    }
    if (threads) {
        cfg.bench.threads = *threads;
    }
    const BenchReport report = run_bench(cfg);
    write_bench_reports(report, out);
    if (cfg.bench.render_masks && !report.seeds.empty()) {
        const SeedResult& first = report.seeds.front();
        const Scenario s = generate_scenario(first.seed, cfg.scenario);
        render_masks(*first.strategies.front().decision, s.layout, first.planted_rows, out / "masks");
    }
    for (const auto& s : report.summary) {
        std::printf("%-17s recall %.3f +- %.3f  coverage %.3f  diversity %.3f\n", s.name.c_str(), s.recall.mean,
                    s.recall.std, s.coverage.mean, s.diversity.mean);
    }
    std::printf("%zu seeds, desk FLOPs ratio %.4f\n", report.seeds.size(), report.flops_ratio);
    return 0;
}

int run_flops_cmd(const std::string& config_path, bool desk, std::optional<double> rate,
                  std::optional<std::size_t> sparse_layer, std::optional<std::size_t> text_tokens, const fs::path& out) {
    const Config cfg = read_config(config_path);
    FlopsArchAssumptions a;
    PruneConfig prune = cfg.prune;
    if (desk) {
        a = assumptions_for(cfg.arch, generate_scenario(cfg.bench.base_seed, cfg.scenario).layout);
    } else {
        a = reference_7b_assumptions();
        prune.sparse_layers = {4};
    }
    if (rate) {
        prune.pruning_rate = *rate;
    }
    if (sparse_layer) {
        prune.sparse_layers = {*sparse_layer};
    }
    if (text_tokens) {
        a.text_tokens = *text_tokens;
    }
    const FlopsStudy study = flops_study(a, prune);
    write_file(out / "flops.json", flops_study_json(study));
    write_file(out / "flops.csv", flops_study_csv(study));
    std::printf("dense %.1f GFLOPs, pruned %.1f GFLOPs, reduction %.1f%%\n", study.dense.total_flops * 1e-9,
                study.pruned.total_flops * 1e-9, 100.0 * (1.0 - study.ratio));
    return 0;
}

int run_masks_cmd(const std::string& config_path, std::uint64_t seed, const fs::path& out) {
    const Config cfg = read_config(config_path);
    const ModelBundle model = build_model(cfg);
    const SeedResult r = run_seed(cfg, model, seed);
    const Scenario s = generate_scenario(seed, cfg.scenario);
    const auto paths = render_masks(*r.strategies.front().decision, s.layout, r.planted_rows, out);
    std::printf("wrote %zu files to %s\n", paths.size(), out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-guided visual token pruning on a desk-scale multi-view decoder"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    auto* forward = app.add_subcommand("forward", "Run one scenario; write the prune trace and trajectory CSV");
    forward->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    forward->add_option("-s,--seed", seed, "Scenario seed");
    forward->add_option("-o,--out", out_dir, "Output directory");

    std::optional<std::size_t> seeds;
    std::optional<std::uint64_t> base_seed;
    std::optional<std::size_t> threads;
    auto* bench = app.add_subcommand("bench", "Compare pruning strategies over many seeds");
    bench->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    bench->add_option("-n,--seeds", seeds, "Number of seeds (overrides bench.seeds)");
    bench->add_option("-s,--seed", base_seed, "First seed (overrides bench.base_seed)");
    bench->add_option("-j,--threads", threads, "Worker threads, 0 = all cores");
    bench->add_option("-o,--out", out_dir, "Output directory");

    bool desk = false;
    std::optional<double> rate;
    std::optional<std::size_t> sparse_layer;
    std::optional<std::size_t> text_tokens;
    auto* flops = app.add_subcommand("flops", "Analytic dense vs pruned FLOPs");
    flops->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    flops->add_flag("--desk", desk, "Use the configured desk-scale model instead of the 7B reference");
    flops->add_option("-r,--rate", rate, "Pruning rate")->check(CLI::Range(0.0, 0.999999));
    flops->add_option("-l,--sparse-layer", sparse_layer, "Single sparse layer (0-based)");
    flops->add_option("-t,--text-tokens", text_tokens, "Text token count");
    flops->add_option("-o,--out", out_dir, "Output directory");

    auto* masks = app.add_subcommand("masks", "Render per-view pruning masks (PPM + text grid)");
    masks->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    masks->add_option("-s,--seed", seed, "Scenario seed");
    masks->add_option("-o,--out", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*forward) {
            return run_forward_cmd(config_path, seed, out_dir);
        }
        if (*bench) {
            return run_bench_cmd(config_path, seeds, base_seed, threads, out_dir);
        }
        if (*flops) {
            return run_flops_cmd(config_path, desk, rate, sparse_layer, text_tokens, out_dir);
        }
        return run_masks_cmd(config_path, seed, out_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ContractViolation& e) {
        std::fprintf(stderr, "contract violation: %s\n", e.what());
        return kExitContract;
    } catch (const std::invalid_argument& e) {
        // Shape, precondition and budget failures raised inside the pipeline.
        std::fprintf(stderr, "contract violation: %s\n", e.what());
        return kExitContract;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
