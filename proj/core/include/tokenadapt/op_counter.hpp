// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace tokenadapt {

/// Multiply-add counters filled in by the transformer kernels when a counter is
/// passed in. Categories mirror the terms of the analytic FLOPs model.
struct OpCounter {
    std::uint64_t projection_macs = 0;  // Q, K, V, O
    std::uint64_t score_macs = 0;       // Q K^T on the main path
    std::uint64_t value_macs = 0;       // P V on the main path
    std::uint64_t ffn_macs = 0;         // gate, up, down
    std::uint64_t scoring_macs = 0;     // RoPE-free Q_raw K_raw^T on sparse layers

    std::uint64_t total() const noexcept {
        return projection_macs + score_macs + value_macs + ffn_macs + scoring_macs;
    }

    friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

}  // namespace tokenadapt
