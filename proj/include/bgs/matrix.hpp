#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bgs {

using index_t = std::ptrdiff_t;

/// Raised when a factorization cannot proceed: a Cholesky pivot that is not
/// positive, a zero diagonal in a triangular solve, or an exactly rank
/// deficient panel in Householder QR. `block()` is the 1-based block index
/// the failure belongs to, or 0 when the kernel was called outside a block
/// algorithm.
class BreakdownError : public std::runtime_error {
public:
    BreakdownError(const std::string& what, index_t block = 0)
        : std::runtime_error(what), block_(block) {}

    index_t block() const noexcept { return block_; }

    /// Copy of this error tagged with a block index.
    BreakdownError at_block(index_t block) const {
        return BreakdownError(what(), block);
    }

private:
    index_t block_;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense column-major matrix. Element (i, j) lives at data()[i + j * rows()].
template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;

    Matrix(index_t rows, index_t cols, T fill = T(0))
        : rows_(rows), cols_(cols) {
        if (rows < 0 || cols < 0) {
            throw DimensionError("Matrix: negative dimension");
        }
        data_.assign(static_cast<std::size_t>(rows * cols), fill);
    }

    /// Builds from row-major nested initializer lists, e.g. {{1, 2}, {3, 4}}.
    Matrix(std::initializer_list<std::initializer_list<T>> rows_init) {
        rows_ = static_cast<index_t>(rows_init.size());
        cols_ = rows_ == 0 ? 0 : static_cast<index_t>(rows_init.begin()->size());
        data_.assign(static_cast<std::size_t>(rows_ * cols_), T(0));
        index_t i = 0;
        for (const auto& row : rows_init) {
            if (static_cast<index_t>(row.size()) != cols_) {
                throw DimensionError("Matrix: ragged initializer");
            }
            index_t j = 0;
            for (const T& v : row) {
                (*this)(i, j++) = v;
            }
            ++i;
        }
    }

    static Matrix identity(index_t rows, index_t cols) {
        Matrix I(rows, cols);
        for (index_t k = 0; k < std::min(rows, cols); ++k) {
            I(k, k) = T(1);
        }
        return I;
    }

    static Matrix identity(index_t n) { return identity(n, n); }

    index_t rows() const noexcept { return rows_; }
    index_t cols() const noexcept { return cols_; }
    index_t size() const noexcept { return rows_ * cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(index_t i, index_t j) noexcept {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return data_[static_cast<std::size_t>(i + j * rows_)];
    }
    const T& operator()(index_t i, index_t j) const noexcept {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return data_[static_cast<std::size_t>(i + j * rows_)];
    }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    std::span<T> col(index_t j) noexcept {
        return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)};
    }
    std::span<const T> col(index_t j) const noexcept {
        return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)};
    }

    /// Copy of columns [first, first + count).
    Matrix columns(index_t first, index_t count) const {
        check_range(0, rows_, first, count);
        Matrix out(rows_, count);
        std::copy_n(data_.data() + first * rows_, rows_ * count, out.data());
        return out;
    }

    /// Copy of the rows x cols submatrix with top-left corner (i0, j0).
    Matrix block(index_t i0, index_t j0, index_t rows, index_t cols) const {
        check_range(i0, rows, j0, cols);
        Matrix out(rows, cols);
        for (index_t j = 0; j < cols; ++j) {
            std::copy_n(&(*this)(i0, j0 + j), rows, &out(0, j));
        }
        return out;
    }

    /// Writes `src` into this matrix with its top-left corner at (i0, j0).
    void set_block(index_t i0, index_t j0, const Matrix& src) {
        check_range(i0, src.rows(), j0, src.cols());
        for (index_t j = 0; j < src.cols(); ++j) {
            std::copy_n(&src(0, j), src.rows(), &(*this)(i0, j0 + j));
        }
    }

    Matrix transposed() const {
        Matrix out(cols_, rows_);
        for (index_t j = 0; j < cols_; ++j) {
            for (index_t i = 0; i < rows_; ++i) {
                out(j, i) = (*this)(i, j);
            }
        }
        return out;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    void check_range(index_t i0, index_t rows, index_t j0, index_t cols) const {
        if (i0 < 0 || j0 < 0 || rows < 0 || cols < 0 || i0 + rows > rows_ ||
            j0 + cols > cols_) {
            throw DimensionError("Matrix: block out of range");
        }
    }

    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<T> data_;
};

/// Square upper-triangular matrix. Entries below the diagonal are exactly
/// zero; construction from a full matrix zeroes them.
template <typename T>
class UpperTriangular {
public:
    UpperTriangular() = default;

    explicit UpperTriangular(index_t order) : full_(order, order) {}

    explicit UpperTriangular(Matrix<T> m) : full_(std::move(m)) {
        if (full_.rows() != full_.cols()) {
            throw DimensionError("UpperTriangular: matrix is not square");
        }
        for (index_t j = 0; j < full_.cols(); ++j) {
            for (index_t i = j + 1; i < full_.rows(); ++i) {
                full_(i, j) = T(0);
            }
        }
    }

    index_t order() const noexcept { return full_.rows(); }

    const T& operator()(index_t i, index_t j) const noexcept {
        return full_(i, j);
    }

    /// Mutable access to an entry on or above the diagonal.
    T& at_upper(index_t i, index_t j) {
        if (i > j) {
            throw std::out_of_range("UpperTriangular: write below diagonal");
        }
        return full_(i, j);
    }

    const Matrix<T>& matrix() const noexcept { return full_; }

    friend bool operator==(const UpperTriangular& a, const UpperTriangular& b) {
        return a.full_ == b.full_;
    }

private:
    Matrix<T> full_;
};

}  // namespace bgs
