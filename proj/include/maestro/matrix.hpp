#pragma once

// Row-major matrix of packed scalars, the common currency between the GEMM
// engines, the CNN lowering and file I/O.

#include <cstddef>
#include <vector>

#include "maestro/errors.hpp"
#include "maestro/softfloat.hpp"

namespace maestro {

class Matrix {
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, Format fmt)
        : rows_(rows), cols_(cols), fmt_(fmt),
          data_(rows * cols, packed(0, fmt)) {}

    static Matrix identity(size_t n, Format fmt) {
        Matrix m(n, n, fmt);
        for (size_t i = 0; i < n; ++i) m.at(i, i) = fp_one(fmt);
        return m;
    }

    static Matrix from_doubles(const std::vector<double>& v, size_t rows,
                               size_t cols, Format fmt) {
        if (v.size() != rows * cols)
            throw ShapeMismatch("Matrix::from_doubles: size mismatch");
        Matrix m(rows, cols, fmt);
        for (size_t i = 0; i < v.size(); ++i) m.data_[i] = from_double(v[i], fmt);
        return m;
    }

    std::vector<double> to_doubles() const {
        std::vector<double> v(data_.size());
        for (size_t i = 0; i < v.size(); ++i) v[i] = to_double(data_[i]);
        return v;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    Format fmt() const { return fmt_; }
    size_t size() const { return data_.size(); }

    Packed& at(size_t r, size_t c) { return data_[r * cols_ + c]; }
    const Packed& at(size_t r, size_t c) const { return data_[r * cols_ + c]; }
    Packed& operator[](size_t i) { return data_[i]; }
    const Packed& operator[](size_t i) const { return data_[i]; }

    const std::vector<Packed>& data() const { return data_; }
    std::vector<Packed>& data() { return data_; }

    bool bits_equal(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_ || fmt_ != o.fmt_)
            return false;
        for (size_t i = 0; i < data_.size(); ++i)
            if (data_[i].bits != o.data_[i].bits) return false;
        return true;
    }

private:
    size_t rows_ = 0, cols_ = 0;
    Format fmt_ = Format::FP32;
    std::vector<Packed> data_;
};

}  // namespace maestro
