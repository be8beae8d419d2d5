// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "tokenadapt/arch.hpp"
#include "tokenadapt/ilsa.hpp"
#include "tokenadapt/planner.hpp"
#include "tokenadapt/scenario.hpp"
#include "tokenadapt/temporal_fusion.hpp"

namespace tokenadapt {

struct BenchParams {
    std::size_t seeds = 20;
    std::uint64_t base_seed = 1;
    /// Worker threads for independent seeds; 0 means hardware concurrency.
    std::size_t threads = 1;
    /// Also write mask images for the first seed.
    bool render_masks = false;
};

/// Everything a run needs. Sections mirror the JSON file:
/// {arch, prune, tfm, planner, scenario, bench}.
struct Config {
    ArchSpec arch;
    WeightInit init{0.02, 1.0};
    std::uint64_t weight_seed = 7;
    PruneConfig prune{0.35, kDefaultRecycleFraction, {2}};
    TfmSpec tfm;
    PlannerConfig planner;
    ScenarioParams scenario;
    BenchParams bench;

    /// Copies shared fields across sections (sparse layers, feature dim,
    /// horizon) and validates. Throws ConfigError naming the offending field.
    void finalize();
};

Config default_config();

/// Missing keys keep their defaults; unknown keys, wrong types and invalid
/// values throw ConfigError. `source` prefixes the diagnostics.
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::string& path);

/// Canonical JSON form (every field, fixed key order).
std::string config_to_json(const Config& cfg, int indent = 2);

}  // namespace tokenadapt
