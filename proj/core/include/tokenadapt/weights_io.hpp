// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tokenadapt/arch.hpp"

namespace tokenadapt {

struct NamedMatrix {
    std::string name;
    Matrix2D value;

    friend bool operator==(const NamedMatrix&, const NamedMatrix&) = default;
};

/// Flat weight file: one text header line
///   "tokenadapt-weights v1 <count> name:RxC name:RxC ...\n"
/// followed by the matrices' entries as little-endian f64, in header order.
void save_weights(const std::filesystem::path& path, const std::vector<NamedMatrix>& tensors);
std::vector<NamedMatrix> load_weights(const std::filesystem::path& path);

std::vector<NamedMatrix> flatten_model_weights(const std::vector<LayerWeights>& layers);
std::vector<LayerWeights> unflatten_model_weights(const std::vector<NamedMatrix>& tensors, const ArchSpec& spec);

}  // namespace tokenadapt
