// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/model.hpp"

#include <algorithm>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

std::vector<std::size_t> retained_rows(const PruneDecision& decision, const SequenceLayout& layout) {
    std::vector<bool> keep(layout.size(), false);
    for (std::size_t i : decision.final) {
        if (i >= layout.size()) {
            throw ContractViolation("sparsifier selected row " + std::to_string(i) + " of a " +
                                    std::to_string(layout.size()) + "-token sequence");
        }
        if (layout[i].modality != Modality::visual) {
            throw ContractViolation("sparsifier selected non-visual row " + std::to_string(i));
        }
        if (keep[i]) {
            throw ContractViolation("sparsifier selected row " + std::to_string(i) + " twice");
        }
        keep[i] = true;
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (keep[i] || layout[i].modality != Modality::visual) {
            rows.push_back(i);
        }
    }
    return rows;
}

ModelOutput model_forward(const Matrix2D& embeddings, const SequenceLayout& layout, const ArchSpec& spec,
                          const std::vector<LayerWeights>& weights, const Sparsifier& sparsifier,
                          OpCounter* counter) {
    spec.validate();
    layout.validate();
    if (embeddings.rows() != layout.size()) {
        throw ShapeError("model_forward: " + std::to_string(embeddings.rows()) + " embedding rows for a " +
                         std::to_string(layout.size()) + "-token layout");
    }
    if (weights.size() != spec.num_layers) {
        throw ShapeError("model_forward: " + std::to_string(weights.size()) + " layer weights for " +
                         std::to_string(spec.num_layers) + " layers");
    }

    ModelOutput out{embeddings, layout, {}};
    for (std::size_t l = 0; l < spec.num_layers; ++l) {
        const bool sparse = spec.is_sparse_layer(l);
        const std::vector<double> positions = out.layout.positions();
        LayerOutput lo = decoder_layer_forward(out.hidden, weights[l], spec, positions, sparse, counter);
        if (sparse && sparsifier) {
            const SparsifyRequest request{l,
                                          out.hidden,
                                          lo.attention_input,
                                          *lo.scoring_weights,
                                          *lo.causal_weights,
                                          lo.hidden,
                                          out.layout};
            PruneDecision decision = sparsifier(request);
            const std::vector<std::size_t> rows = retained_rows(decision, out.layout);
            PruneTraceEntry entry{l, out.layout.size(), rows.size(), std::move(decision), out.layout};
            out.hidden = lo.hidden.select_rows(rows);
            out.layout = out.layout.select(rows);
            out.trace.push_back(std::move(entry));
        } else {
            out.hidden = std::move(lo.hidden);
        }
    }
    return out;
}

}  // namespace tokenadapt
