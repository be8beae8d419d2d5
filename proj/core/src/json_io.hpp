// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "json.hpp"
#include "tokenadapt/config.hpp"
#include "tokenadapt/flops.hpp"
#include "tokenadapt/prune_decision.hpp"

namespace tokenadapt::detail {

using Json = nlohmann::ordered_json;

Json config_json(const Config& cfg);
Json decision_json(const PruneDecision& d);
Json flops_json(const FlopsReport& r);

}  // namespace tokenadapt::detail
