// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/matrix.hpp"

#include <cmath>

#include "tokenadapt/errors.hpp"

namespace tokenadapt {

Matrix2D::Matrix2D(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix2D::Matrix2D(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("Matrix2D: data length " + std::to_string(data_.size()) + " != " + std::to_string(rows_) +
                         "x" + std::to_string(cols_));
    }
}

Matrix2D::Matrix2D(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw ShapeError("Matrix2D: ragged initializer list");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix2D Matrix2D::identity(std::size_t n) {
    Matrix2D m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix2D Matrix2D::select_rows(std::span<const std::size_t> indices) const {
    Matrix2D out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_) {
            throw ShapeError("select_rows: index " + std::to_string(indices[i]) + " out of range for " +
                             shape_string());
        }
        auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Matrix2D Matrix2D::col_block(std::size_t begin, std::size_t count) const {
    if (begin + count > cols_) {
        throw ShapeError("col_block: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") exceeds " + shape_string());
    }
    Matrix2D out(rows_, count);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < count; ++c) {
            out(r, c) = (*this)(r, begin + c);
        }
    }
    return out;
}

Matrix2D Matrix2D::transpose() const {
    Matrix2D out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(c, r) = (*this)(r, c);
        }
    }
    return out;
}

bool Matrix2D::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

std::string Matrix2D::shape_string() const {
    return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

Matrix3D::Matrix3D(std::size_t d0, std::size_t d1, std::size_t d2, double fill)
    : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, fill) {}

Matrix2D Matrix3D::slice(std::size_t i) const {
    Matrix2D out(d1_, d2_);
    auto first = data_.begin() + static_cast<std::ptrdiff_t>(i * d1_ * d2_);
    std::copy(first, first + static_cast<std::ptrdiff_t>(d1_ * d2_), out.data().begin());
    return out;
}

void Matrix3D::set_slice(std::size_t i, const Matrix2D& m) {
    if (m.rows() != d1_ || m.cols() != d2_) {
        throw ShapeError("Matrix3D::set_slice: " + m.shape_string() + " into " + shape_string());
    }
    std::copy(m.data().begin(), m.data().end(), data_.begin() + static_cast<std::ptrdiff_t>(i * d1_ * d2_));
}

std::string Matrix3D::shape_string() const {
    return "[" + std::to_string(d0_) + "x" + std::to_string(d1_) + "x" + std::to_string(d2_) + "]";
}

}  // namespace tokenadapt
