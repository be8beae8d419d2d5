// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

namespace {

constexpr const char* kMagic = "tokenadapt-weights";
constexpr const char* kVersion = "v1";

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) {
            r = (r << 8) | ((v >> (8 * i)) & 0xffU);
        }
        return r;
    } else {
        return v;
    }
}

Matrix2D row_matrix(const std::vector<double>& v) { return Matrix2D(1, v.size(), v); }

std::vector<double> as_vector(const Matrix2D& m) { return {m.data().begin(), m.data().end()}; }

}  // namespace

void save_weights(const std::filesystem::path& path, const std::vector<NamedMatrix>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("save_weights: cannot open " + path.string());
    }
    out << kMagic << ' ' << kVersion << ' ' << tensors.size();
    for (const auto& t : tensors) {
        if (t.name.find_first_of(" :\n") != std::string::npos) {
            throw PreconditionError("save_weights: tensor name '" + t.name + "' contains a separator");
        }
        out << ' ' << t.name << ':' << t.value.rows() << 'x' << t.value.cols();
    }
    out << '\n';
    for (const auto& t : tensors) {
        for (double v : t.value.data()) {
            const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
            char buf[8];
            std::memcpy(buf, &bits, sizeof(buf));
            out.write(buf, sizeof(buf));
        }
    }
    if (!out) {
        throw std::runtime_error("save_weights: write failed for " + path.string());
    }
}

std::vector<NamedMatrix> load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("load_weights: cannot open " + path.string());
    }
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, version;
    std::size_t count = 0;
    hs >> magic >> version >> count;
    if (magic != kMagic || version != kVersion) {
        throw ShapeError("load_weights: bad header in " + path.string());
    }
    std::vector<NamedMatrix> tensors;
    for (std::size_t i = 0; i < count; ++i) {
        std::string entry;
        if (!(hs >> entry)) {
            throw ShapeError("load_weights: header lists fewer than " + std::to_string(count) + " tensors");
        }
        const auto colon = entry.rfind(':');
        const auto x = entry.rfind('x');
        if (colon == std::string::npos || x == std::string::npos || x < colon) {
            throw ShapeError("load_weights: malformed shape entry '" + entry + "'");
        }
        const std::size_t rows = std::stoull(entry.substr(colon + 1, x - colon - 1));
        const std::size_t cols = std::stoull(entry.substr(x + 1));
        tensors.push_back({entry.substr(0, colon), Matrix2D(rows, cols)});
    }
    for (auto& t : tensors) {
        for (double& v : t.value.data()) {
            char buf[8];
            if (!in.read(buf, sizeof(buf))) {
                throw ShapeError("load_weights: truncated payload for '" + t.name + "'");
            }
            std::uint64_t bits;
            std::memcpy(&bits, buf, sizeof(bits));
            v = std::bit_cast<double>(to_little_endian(bits));
        }
    }
    return tensors;
}

std::vector<NamedMatrix> flatten_model_weights(const std::vector<LayerWeights>& layers) {
    std::vector<NamedMatrix> out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        const auto& w = layers[l];
        out.push_back({p + "wq", w.wq});
        out.push_back({p + "wk", w.wk});
        out.push_back({p + "wv", w.wv});
        out.push_back({p + "wo", w.wo});
        out.push_back({p + "w_gate", w.w_gate});
        out.push_back({p + "w_up", w.w_up});
        out.push_back({p + "w_down", w.w_down});
        out.push_back({p + "attn_norm_gain", row_matrix(w.attn_norm_gain)});
        out.push_back({p + "ffn_norm_gain", row_matrix(w.ffn_norm_gain)});
    }
    return out;
}

std::vector<LayerWeights> unflatten_model_weights(const std::vector<NamedMatrix>& tensors, const ArchSpec& spec) {
    constexpr std::size_t kPerLayer = 9;
    if (tensors.size() != spec.num_layers * kPerLayer) {
        throw ShapeError("unflatten_model_weights: " + std::to_string(tensors.size()) + " tensors for " +
                         std::to_string(spec.num_layers) + " layers");
    }
    std::vector<LayerWeights> layers(spec.num_layers);
    for (std::size_t l = 0; l < spec.num_layers; ++l) {
        const auto* t = &tensors[l * kPerLayer];
        auto& w = layers[l];
        w.wq = t[0].value;
        w.wk = t[1].value;
        w.wv = t[2].value;
        w.wo = t[3].value;
        w.w_gate = t[4].value;
        w.w_up = t[5].value;
        w.w_down = t[6].value;
        w.attn_norm_gain = as_vector(t[7].value);
        w.ffn_norm_gain = as_vector(t[8].value);
        w.validate(spec);
    }
    return layers;
}

}  // namespace tokenadapt
