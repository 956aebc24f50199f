#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "hoggcn/common.hpp"

namespace hoggcn {

/// Dense row-major matrix of doubles. The only dense container in the
/// library; vectors are n x 1, scalars 1 x 1.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols, 0.0) {
        if (rows < 0 || cols < 0) throw Error("Matrix: negative dimensions");
    }
    Matrix(int rows, int cols, std::initializer_list<double> values) : Matrix(rows, cols) {
        if (static_cast<std::size_t>(rows) * cols != values.size())
            throw Error("Matrix: initializer size mismatch");
        std::size_t i = 0;
        for (double x : values) v_[i++] = x;
    }

    static Matrix full(int rows, int cols, double value) {
        Matrix m(rows, cols);
        for (double& x : m.v_) x = value;
        return m;
    }
    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }

    double& operator()(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
    double* row(int r) { return v_.data() + static_cast<std::size_t>(r) * cols_; }
    const double* row(int r) const { return v_.data() + static_cast<std::size_t>(r) * cols_; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && v_ == o.v_; }

    void fill(double value) { for (double& x : v_) x = value; }
    bool all_finite() const {
        for (double x : v_) if (!std::isfinite(x)) return false;
        return true;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> v_;
};

// Kernels. `accumulate` adds into `out` instead of overwriting; `out` must be
// pre-shaped when accumulating.

/// out = a * b, a: (m,k), b: (k,n).
void matmul_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate = false);
/// out = a * b^T, a: (m,k), b: (n,k).
void matmul_nt_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate = false);
/// out = a^T * b, a: (k,m), b: (k,n).
void matmul_tn_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate = false);

Matrix matmul(const Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace hoggcn
