// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "tokenadapt/arch.hpp"

namespace tokenadapt {

/// |retained ∩ planted| / |planted|; 1 when nothing is planted.
double salient_recall(std::span<const std::size_t> retained, std::span<const std::size_t> planted);

/// Fraction of views (among those with visual tokens) keeping at least one token.
double view_coverage(std::span<const std::size_t> retained, const SequenceLayout& layout);

/// Mean of 1 - cos(h_i, h_j) over unordered retained pairs; 0 with fewer than two.
double pairwise_diversity(const Matrix2D& h, std::span<const std::size_t> retained);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample (n - 1) standard deviation, 0 when n < 2
};

MeanStd mean_std(std::span<const double> values);

}  // namespace tokenadapt
