// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tokenadapt {

/// Dense row-major matrix of doubles. Value type; copies are deep.
class Matrix2D {
public:
    Matrix2D() = default;
    Matrix2D(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix2D(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix2D(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix2D identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    /// Rows picked by `indices`, in the given order.
    Matrix2D select_rows(std::span<const std::size_t> indices) const;
    /// Columns [begin, begin + count).
    Matrix2D col_block(std::size_t begin, std::size_t count) const;
    Matrix2D transpose() const;

    bool all_finite() const noexcept;
    std::string shape_string() const;

    friend bool operator==(const Matrix2D&, const Matrix2D&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Dense row-major 3-d array, extents (d0, d1, d2).
class Matrix3D {
public:
    Matrix3D() = default;
    Matrix3D(std::size_t d0, std::size_t d1, std::size_t d2, double fill = 0.0);

    std::size_t dim0() const noexcept { return d0_; }
    std::size_t dim1() const noexcept { return d1_; }
    std::size_t dim2() const noexcept { return d2_; }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
        return data_[(i * d1_ + j) * d2_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return data_[(i * d1_ + j) * d2_ + k];
    }

    std::span<double> vec(std::size_t i, std::size_t j) noexcept { return {data_.data() + (i * d1_ + j) * d2_, d2_}; }
    std::span<const double> vec(std::size_t i, std::size_t j) const noexcept {
        return {data_.data() + (i * d1_ + j) * d2_, d2_};
    }

    /// Slice i along dim0 as a (d1 x d2) matrix.
    Matrix2D slice(std::size_t i) const;
    void set_slice(std::size_t i, const Matrix2D& m);

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    std::string shape_string() const;

    friend bool operator==(const Matrix3D&, const Matrix3D&) = default;

private:
    std::size_t d0_ = 0;
    std::size_t d1_ = 0;
    std::size_t d2_ = 0;
    std::vector<double> data_;
};

}  // namespace tokenadapt
