// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace tokenadapt {

struct RngSeed {
    std::uint64_t seed = 0;
    friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based stream: the i-th draw is a pure function of (key, i), so
/// streams are reproducible bit-for-bit and independent substreams come from
/// split(). Distributions are implemented here rather than via <random> so the
/// produced values do not depend on the standard library.
class Rng {
public:
    explicit Rng(RngSeed seed) noexcept : key_(splitmix64(seed.seed ^ 0x5851f42d4c957f2dULL)) {}

    /// Child stream keyed by (this key, tag). Does not advance this stream.
    Rng split(std::uint64_t tag) const noexcept;
    Rng split(std::string_view tag) const noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept;
    /// Standard normal (Box-Muller, one value per call).
    double normal() noexcept;
    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

private:
    struct FromKey {};
    Rng(FromKey, std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace tokenadapt
