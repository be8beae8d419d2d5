// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

std::string view_name(std::size_t view_id) {
    if (view_id < kViewNames.size()) {
        return kViewNames[view_id];
    }
    return "View " + std::to_string(view_id);
}

void ScenarioParams::validate() const {
    if (views == 0 || tokens_per_view == 0 || feature_dim == 0) {
        throw PreconditionError("ScenarioParams: views, tokens_per_view and feature_dim must be positive");
    }
    if (text_tokens == 0) {
        throw PreconditionError("ScenarioParams: at least one text token is required");
    }
    if (anchor_text_tokens > text_tokens) {
        throw PreconditionError("ScenarioParams: anchor_text_tokens exceeds text_tokens");
    }
    if (planted_per_view.size() != views) {
        throw PreconditionError("ScenarioParams: planted_per_view has " + std::to_string(planted_per_view.size()) +
                                " entries for " + std::to_string(views) + " views");
    }
    for (std::size_t p : planted_per_view) {
        if (p > tokens_per_view) {
            throw PreconditionError("ScenarioParams: planted count above tokens_per_view");
        }
    }
    if (alignment_strength < 0.0 || noise_scale < 0.0 || temporal_noise < 0.0 || text_noise < 0.0 ||
        modality_gap < 0.0) {
        throw PreconditionError("ScenarioParams: strengths and noise scales must be non-negative");
    }
    if (horizon < 2) {
        throw PreconditionError("ScenarioParams: horizon must be >= 2");
    }
}

namespace {

std::vector<double> noise_vector(Rng& rng, std::size_t dim, double scale) {
    std::vector<double> v(dim);
    for (double& x : v) {
        x = scale * rng.normal();
    }
    return v;
}

std::vector<double> scaled_direction(Rng& rng, std::size_t dim, double norm) {
    std::vector<double> v = noise_vector(rng, dim, 1.0);
    double len = 0.0;
    for (double x : v) {
        len += x * x;
    }
    len = std::sqrt(len);
    for (double& x : v) {
        x *= norm / len;
    }
    return v;
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

// Constant-curvature arc at constant speed, 0.5 s apart.
Trajectory synthetic_path(Rng& rng, std::size_t horizon) {
    constexpr double kDt = 0.5;
    const double speed = rng.uniform(3.0, 10.0);
    const double curvature = rng.uniform(-0.05, 0.05);
    Matrix2D w(horizon, kWaypointDim);
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const double ds = speed * kDt;
        x += ds * std::cos(heading + 0.5 * curvature * ds);
        y += ds * std::sin(heading + 0.5 * curvature * ds);
        heading += curvature * ds;
        w(t, 0) = x;
        w(t, 1) = y;
        w(t, 2) = heading;
    }
    return Trajectory{std::move(w)};
}

}  // namespace

Scenario generate_scenario(std::uint64_t seed, const ScenarioParams& params) {
    params.validate();
    const Rng root = Rng(RngSeed{seed}).split("scenario");
    const std::size_t dim = params.feature_dim;
    const double norm = std::sqrt(static_cast<double>(dim));

    Scenario s;
    s.seed = seed;
    s.params = params;

    Rng dir_rng = root.split("direction");
    s.anchor_direction = scaled_direction(dir_rng, dim, norm);
    Rng gap_rng = root.split("modality");
    s.modality_direction = scaled_direction(gap_rng, dim, norm);

    Rng planted_rng = root.split("planted");
    for (std::size_t v = 0; v < params.views; ++v) {
        s.planted.push_back(sample_without_replacement(planted_rng, params.tokens_per_view, params.planted_per_view[v]));
    }

    const std::size_t total = params.views * params.tokens_per_view;
    const std::size_t frames = params.history_frames + 1;
    s.frames.frames = Matrix3D(frames, total, dim);
    Rng token_rng = root.split("tokens");
    Rng jitter_rng = root.split("jitter");
    for (std::size_t v = 0; v < params.views; ++v) {
        const std::size_t begin = v * params.tokens_per_view;
        s.frames.views.push_back(ViewSpan{v, begin, begin + params.tokens_per_view});
        for (std::size_t j = 0; j < params.tokens_per_view; ++j) {
            std::vector<double> base = noise_vector(token_rng, dim, params.noise_scale);
            for (std::size_t c = 0; c < dim; ++c) {
                base[c] += params.modality_gap * s.modality_direction[c];
            }
            if (std::binary_search(s.planted[v].begin(), s.planted[v].end(), j)) {
                for (std::size_t c = 0; c < dim; ++c) {
                    base[c] += params.alignment_strength * s.anchor_direction[c];
                }
            }
            for (std::size_t t = 0; t < frames; ++t) {
                for (std::size_t c = 0; c < dim; ++c) {
                    s.frames.frames(t, begin + j, c) = base[c] + params.temporal_noise * jitter_rng.normal();
                }
            }
        }
    }

    Rng text_rng = root.split("text");
    s.text = Matrix2D(params.text_tokens, dim);
    for (std::size_t t = 0; t < params.text_tokens; ++t) {
        const bool anchor = t < params.anchor_text_tokens;
        for (std::size_t c = 0; c < dim; ++c) {
            s.text(t, c) = anchor ? s.anchor_direction[c] + params.text_noise * text_rng.normal()
                                  : text_rng.normal() - params.modality_gap * s.modality_direction[c];
        }
    }

    if (params.separators) {
        Rng sep_rng = root.split("separators");
        s.separators = Matrix2D(params.views, dim);
        for (double& x : s.separators.data()) {
            x = sep_rng.normal();
        }
    }

    std::vector<TokenInfo> tokens;
    for (std::size_t v = 0; v < params.views; ++v) {
        if (params.separators) {
            tokens.push_back(TokenInfo{Modality::other, std::nullopt, std::nullopt, tokens.size()});
        }
        for (std::size_t j = 0; j < params.tokens_per_view; ++j) {
            if (std::binary_search(s.planted[v].begin(), s.planted[v].end(), j)) {
                s.planted_rows.push_back(tokens.size());
            }
            tokens.push_back(TokenInfo{Modality::visual, v, std::nullopt, tokens.size()});
        }
    }
    for (std::size_t t = 0; t < params.text_tokens; ++t) {
        tokens.push_back(TokenInfo{Modality::text, std::nullopt, std::nullopt, tokens.size()});
    }
    s.layout = SequenceLayout(std::move(tokens));

    Rng path_rng = root.split("trajectory");
    s.ground_truth = synthetic_path(path_rng, params.horizon);
    return s;
}

Matrix2D assemble_embeddings(const Scenario& s, const TfmSpec& tfm, const TfmWeights& tfm_weights,
                             const AdapterWeights& adapter) {
    const Matrix2D visual = adapter_project(tfm_forward(s.frames, tfm_weights, tfm), adapter);
    const Matrix2D text = adapter_project(s.text, adapter);
    const Matrix2D seps = s.params.separators ? adapter_project(s.separators, adapter) : Matrix2D();
    const std::size_t d = visual.cols();
    Matrix2D out(s.layout.size(), d);
    std::size_t visual_row = 0;
    std::size_t text_row = 0;
    std::size_t sep_row = 0;
    for (std::size_t r = 0; r < s.layout.size(); ++r) {
        const Matrix2D* src = nullptr;
        std::size_t src_row = 0;
        switch (s.layout[r].modality) {
            case Modality::visual: src = &visual; src_row = visual_row++; break;
            case Modality::text: src = &text; src_row = text_row++; break;
            case Modality::other: src = &seps; src_row = sep_row++; break;
        }
        for (std::size_t c = 0; c < d; ++c) {
            out(r, c) = (*src)(src_row, c);
        }
    }
    return out;
}

}  // namespace tokenadapt
