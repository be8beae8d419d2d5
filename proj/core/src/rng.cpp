// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/rng.hpp"

#include <cmath>
#include <numbers>

namespace tokenadapt {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::split(std::uint64_t tag) const noexcept {
    return Rng(FromKey{}, splitmix64(key_ ^ splitmix64(tag + 0x632be59bd9b4e019ULL)));
}

Rng Rng::split(std::string_view tag) const noexcept {
    // FNV-1a over the tag bytes.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h = (h ^ c) * 0x100000001b3ULL;
    }
    return split(h);
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t i = counter_++;
    return splitmix64(key_ + splitmix64(i));
}

double Rng::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) noexcept {
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t v = next_u64();
    while (v >= limit) {
        v = next_u64();
    }
    return v % n;
}

double Rng::normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace tokenadapt
