#include "hoggcn/matrix.hpp"

#include <algorithm>

namespace hoggcn {

namespace {

void check_out(Matrix& out, int rows, int cols, bool accumulate) {
    if (accumulate) {
        if (out.rows() != rows || out.cols() != cols)
            throw Error("matmul: accumulate target shape mismatch");
    } else if (out.rows() != rows || out.cols() != cols) {
        out = Matrix(rows, cols);
    } else {
        out.fill(0.0);
    }
}

}  // namespace

void matmul_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate) {
    if (a.cols() != b.rows()) throw Error("matmul: inner dimension mismatch");
    const int m = a.rows(), k = a.cols(), n = b.cols();
    check_out(out, m, n, accumulate);
    // i-k-j order: inner loop streams a full row of b and of out.
    for (int i = 0; i < m; ++i) {
        const double* __restrict ai = a.row(i);
        double* __restrict oi = out.row(i);
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            if (aip == 0.0) continue;
            const double* __restrict bp = b.row(p);
            for (int j = 0; j < n; ++j) oi[j] += aip * bp[j];
        }
    }
}

void matmul_nt_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate) {
    if (a.cols() != b.cols()) throw Error("matmul_nt: inner dimension mismatch");
    const int m = a.rows(), k = a.cols(), n = b.rows();
    check_out(out, m, n, accumulate);
    for (int i = 0; i < m; ++i) {
        const double* __restrict ai = a.row(i);
        double* __restrict oi = out.row(i);
        for (int j = 0; j < n; ++j) {
            const double* __restrict bj = b.row(j);
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
            oi[j] += acc;
        }
    }
}

void matmul_tn_into(Matrix& out, const Matrix& a, const Matrix& b, bool accumulate) {
    if (a.rows() != b.rows()) throw Error("matmul_tn: inner dimension mismatch");
    const int k = a.rows(), m = a.cols(), n = b.cols();
    check_out(out, m, n, accumulate);
    for (int p = 0; p < k; ++p) {
        const double* __restrict ap = a.row(p);
        const double* __restrict bp = b.row(p);
        for (int i = 0; i < m; ++i) {
            const double api = ap[i];
            if (api == 0.0) continue;
            double* __restrict oi = out.row(i);
            for (int j = 0; j < n; ++j) oi[j] += api * bp[j];
        }
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out;
    matmul_into(out, a, b);
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw Error("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace hoggcn
