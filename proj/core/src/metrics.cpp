// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tokenadapt/kernels.hpp"

namespace tokenadapt {

double salient_recall(std::span<const std::size_t> retained, std::span<const std::size_t> planted) {
    if (planted.empty()) {
        return 1.0;
    }
    const std::set<std::size_t> kept(retained.begin(), retained.end());
    std::size_t hits = 0;
    for (std::size_t p : planted) {
        hits += kept.count(p);
    }
    return static_cast<double>(hits) / static_cast<double>(planted.size());
}

double view_coverage(std::span<const std::size_t> retained, const SequenceLayout& layout) {
    std::set<std::size_t> all_views;
    for (std::size_t r : layout.visual_indices()) {
        all_views.insert(layout[r].view_id.value());
    }
    if (all_views.empty()) {
        return 0.0;
    }
    std::set<std::size_t> covered;
    for (std::size_t r : retained) {
        if (layout[r].modality == Modality::visual) {
            covered.insert(layout[r].view_id.value());
        }
    }
    return static_cast<double>(covered.size()) / static_cast<double>(all_views.size());
}

double pairwise_diversity(const Matrix2D& h, std::span<const std::size_t> retained) {
    const std::size_t n = retained.size();
    if (n < 2) {
        return 0.0;
    }
    const CosineSimilarity cs = cosine_sim_matrix(h.select_rows(retained));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            sum += 1.0 - cs.sim(i, j);
        }
    }
    return sum / static_cast<double>(n * (n - 1) / 2);
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd r;
    if (values.empty()) {
        return r;
    }
    for (double v : values) {
        r.mean += v;
    }
    r.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - r.mean) * (v - r.mean);
        }
        r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return r;
}

}  // namespace tokenadapt
