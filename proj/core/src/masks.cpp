// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/masks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "tokenadapt/errors.hpp"
#include "tokenadapt/scenario.hpp"

namespace tokenadapt {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kBlack = {0, 0, 0};
constexpr Rgb kKeptFill = {200, 200, 200};
constexpr Rgb kEmptyFill = {20, 30, 80};
constexpr Rgb kGreen = {0, 200, 0};
constexpr Rgb kOrange = {255, 140, 0};
constexpr Rgb kGridLine = {255, 255, 255};
constexpr std::size_t kRing = 2;

void put(RgbImage& img, std::size_t x, std::size_t y, const Rgb& c) {
    std::copy(c.begin(), c.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(3 * (y * img.width + x)));
}

Rgb get(const RgbImage& img, std::size_t x, std::size_t y) {
    const std::size_t o = 3 * (y * img.width + x);
    return {img.rgb[o], img.rgb[o + 1], img.rgb[o + 2]};
}

// Distance from the nearest cell edge, 0 on the grid line.
std::size_t edge_depth(std::size_t px, std::size_t py) {
    const std::size_t x = px % kCellPixels;
    const std::size_t y = py % kCellPixels;
    return std::min({x, y, kCellPixels - 1 - x, kCellPixels - 1 - y});
}

}  // namespace

std::size_t ViewMask::count(CellState s) const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [s](const MaskCell& c) { return c.state == s; }));
}

std::vector<ViewMask> build_masks(const PruneDecision& decision, const SequenceLayout& layout,
                                  const std::vector<std::size_t>& planted) {
    const std::set<std::size_t> global(decision.global.begin(), decision.global.end());
    const std::set<std::size_t> recycle(decision.recycle.begin(), decision.recycle.end());
    const std::set<std::size_t> planted_pos(planted.begin(), planted.end());
    std::map<std::size_t, std::vector<MaskCell>> by_view;
    for (std::size_t r : layout.visual_indices()) {
        MaskCell c;
        c.state = recycle.count(r) ? CellState::recycled : global.count(r) ? CellState::kept : CellState::pruned;
        c.planted = planted_pos.count(layout[r].original_position) > 0;
        by_view[layout[r].view_id.value()].push_back(c);
    }
    std::vector<ViewMask> out;
    for (auto& [view, cells] : by_view) {
        ViewMask m;
        m.view_id = view;
        m.grid_cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cells.size()))));
        m.grid_rows = (cells.size() + m.grid_cols - 1) / m.grid_cols;
        m.cells = std::move(cells);
        m.cells.resize(m.grid_rows * m.grid_cols);
        out.push_back(std::move(m));
    }
    return out;
}

RgbImage render_view(const ViewMask& mask) {
    RgbImage img;
    img.width = mask.grid_cols * kCellPixels;
    img.height = mask.grid_rows * kCellPixels;
    img.rgb.assign(3 * img.width * img.height, 0);
    for (std::size_t py = 0; py < img.height; ++py) {
        for (std::size_t px = 0; px < img.width; ++px) {
            const MaskCell& c = mask.cells[(py / kCellPixels) * mask.grid_cols + px / kCellPixels];
            const std::size_t depth = edge_depth(px, py);
            Rgb color = c.state == CellState::pruned  ? kBlack
                        : c.state == CellState::empty ? kEmptyFill
                                                      : kKeptFill;
            if (depth == 0) {
                color = kGridLine;
            } else if (depth <= kRing && c.state == CellState::recycled) {
                color = kGreen;
            } else if (depth > kRing && depth <= 2 * kRing && c.planted) {
                color = kOrange;
            }
            put(img, px, py, color);
        }
    }
    return img;
}

std::vector<MaskCell> parse_view(const RgbImage& image, std::size_t grid_rows, std::size_t grid_cols) {
    if (image.width != grid_cols * kCellPixels || image.height != grid_rows * kCellPixels) {
        throw ShapeError("parse_view: image size does not match the grid");
    }
    std::vector<MaskCell> cells;
    for (std::size_t gy = 0; gy < grid_rows; ++gy) {
        for (std::size_t gx = 0; gx < grid_cols; ++gx) {
            const std::size_t x0 = gx * kCellPixels;
            const std::size_t y0 = gy * kCellPixels;
            const Rgb fill = get(image, x0 + kCellPixels / 2, y0 + kCellPixels / 2);
            const Rgb outer = get(image, x0 + 1, y0 + kCellPixels / 2);
            const Rgb inner = get(image, x0 + kRing + 1, y0 + kCellPixels / 2);
            MaskCell c;
            if (fill == kBlack) {
                c.state = CellState::pruned;
            } else if (fill == kEmptyFill) {
                c.state = CellState::empty;
            } else {
                c.state = outer == kGreen ? CellState::recycled : CellState::kept;
            }
            c.planted = inner == kOrange;
            cells.push_back(c);
        }
    }
    return cells;
}

void write_ppm(std::ostream& out, const RgbImage& image) {
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
}

RgbImage read_ppm(std::istream& in) {
    std::string magic;
    RgbImage img;
    int maxval = 0;
    in >> magic >> img.width >> img.height >> maxval;
    if (!in || magic != "P6" || maxval != 255) {
        throw ShapeError("read_ppm: expected a binary P6 image with maxval 255");
    }
    in.get();  // single whitespace before the raster
    img.rgb.resize(3 * img.width * img.height);
    in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) {
        throw ShapeError("read_ppm: truncated raster");
    }
    return img;
}

std::string grid_dump(const std::vector<ViewMask>& masks) {
    std::string out;
    for (const auto& m : masks) {
        out += "# view " + std::to_string(m.view_id) + " " + view_name(m.view_id) + " " + std::to_string(m.grid_rows) +
               "x" + std::to_string(m.grid_cols) + "\n";
        for (std::size_t r = 0; r < m.grid_rows; ++r) {
            for (std::size_t c = 0; c < m.grid_cols; ++c) {
                const MaskCell& cell = m.cells[r * m.grid_cols + c];
                char ch = ' ';
                switch (cell.state) {
                    case CellState::kept: ch = cell.planted ? '*' : '.'; break;
                    case CellState::pruned: ch = cell.planted ? 'x' : '#'; break;
                    case CellState::recycled: ch = cell.planted ? 'R' : 'r'; break;
                    case CellState::empty: break;
                }
                out += ch;
            }
            out += "\n";
        }
    }
    return out;
}

std::vector<std::filesystem::path> render_masks(const PruneDecision& decision, const SequenceLayout& layout,
                                                const std::vector<std::size_t>& planted,
                                                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::vector<ViewMask> masks = build_masks(decision, layout, planted);
    std::vector<std::filesystem::path> paths;
    for (const auto& m : masks) {
        const std::filesystem::path p = dir / ("view_" + std::to_string(m.view_id) + ".ppm");
        std::ofstream out(p, std::ios::binary);
        write_ppm(out, render_view(m));
        paths.push_back(p);
    }
    const std::filesystem::path txt = dir / "masks.txt";
    std::ofstream out(txt, std::ios::binary);
    out << grid_dump(masks);
    paths.push_back(txt);
    return paths;
}

}  // namespace tokenadapt
