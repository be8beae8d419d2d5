// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tokenadapt/arch.hpp"
#include "tokenadapt/prune_decision.hpp"

namespace tokenadapt {

enum class CellState : std::uint8_t { empty, kept, pruned, recycled };

struct MaskCell {
    CellState state = CellState::empty;
    bool planted = false;

    friend bool operator==(const MaskCell&, const MaskCell&) = default;
};

/// One view's tokens in row-major grid order (the k-th token of the view in
/// sequence order is cell k). Cells past the token count are empty.
struct ViewMask {
    std::size_t view_id = 0;
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    std::vector<MaskCell> cells;

    std::size_t count(CellState s) const;
};

/// `planted` holds original token positions.
std::vector<ViewMask> build_masks(const PruneDecision& decision, const SequenceLayout& layout,
                                  const std::vector<std::size_t>& planted);

struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
};

inline constexpr std::size_t kCellPixels = 12;

/// Pruned cells filled black, kept and recycled cells light grey, empty cells
/// dark blue. Recycled cells get a green outer ring, planted cells an orange
/// inner ring.
RgbImage render_view(const ViewMask& mask);

/// Recovers the cells from a rendered image.
std::vector<MaskCell> parse_view(const RgbImage& image, std::size_t grid_rows, std::size_t grid_cols);

void write_ppm(std::ostream& out, const RgbImage& image);
RgbImage read_ppm(std::istream& in);

/// Character grid: '.' kept, '#' pruned, 'r' recycled, ' ' empty; planted
/// tokens use '*', 'x', 'R' respectively.
std::string grid_dump(const std::vector<ViewMask>& masks);

/// Writes view_<id>.ppm per view plus masks.txt; returns the written paths.
std::vector<std::filesystem::path> render_masks(const PruneDecision& decision, const SequenceLayout& layout,
                                                const std::vector<std::size_t>& planted,
                                                const std::filesystem::path& dir);

}  // namespace tokenadapt
