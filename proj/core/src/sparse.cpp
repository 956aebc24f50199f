#include "hoggcn/sparse.hpp"

#include <algorithm>
#include <numeric>

namespace hoggcn {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols,
                                         std::vector<std::int64_t> rows_idx,
                                         std::vector<int> cols_idx,
                                         std::vector<double> vals) {
    const std::size_t m = rows_idx.size();
    if (cols_idx.size() != m || vals.size() != m)
        throw Error("from_triplets: triplet arrays differ in length");
    for (std::size_t i = 0; i < m; ++i) {
        if (rows_idx[i] < 0 || rows_idx[i] >= rows || cols_idx[i] < 0 || cols_idx[i] >= cols)
            throw Error("from_triplets: index out of range");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows_idx[a] != rows_idx[b]) return rows_idx[a] < rows_idx[b];
        return cols_idx[a] < cols_idx[b];
    });

    SparseMatrix s(rows, cols);
    s.col_idx.reserve(m);
    s.values.reserve(m);
    int prev_r = -1, prev_c = -1;
    for (std::size_t oi = 0; oi < m; ++oi) {
        const std::size_t i = order[oi];
        const int r = static_cast<int>(rows_idx[i]);
        const int c = cols_idx[i];
        if (r == prev_r && c == prev_c) {
            s.values.back() += vals[i];
            continue;
        }
        s.col_idx.push_back(c);
        s.values.push_back(vals[i]);
        ++s.row_ptr[static_cast<std::size_t>(r) + 1];
        prev_r = r;
        prev_c = c;
    }
    for (int r = 0; r < rows; ++r) s.row_ptr[r + 1] += s.row_ptr[r];
    s.validate();
    return s;
}

void SparseMatrix::validate() const {
    if (rows < 0 || cols < 0) throw Error("SparseMatrix: negative dimensions");
    if (row_ptr.size() != static_cast<std::size_t>(rows) + 1)
        throw Error("SparseMatrix: row_ptr size mismatch");
    if (row_ptr.front() != 0 || row_ptr.back() != nnz())
        throw Error("SparseMatrix: row_ptr endpoints inconsistent with stored values");
    if (col_idx.size() != values.size())
        throw Error("SparseMatrix: col_idx/values size mismatch");
    for (int r = 0; r < rows; ++r) {
        if (row_ptr[r] > row_ptr[r + 1]) throw Error("SparseMatrix: row_ptr not monotone");
        for (std::int64_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e) {
            if (col_idx[e] < 0 || col_idx[e] >= cols) throw Error("SparseMatrix: column out of range");
            if (e > row_ptr[r] && col_idx[e] <= col_idx[e - 1])
                throw Error("SparseMatrix: columns not strictly increasing within a row");
        }
    }
}

SparseMatrix SparseMatrix::transpose() const {
    SparseMatrix t(cols, rows);
    std::vector<std::int64_t> count(static_cast<std::size_t>(cols) + 1, 0);
    for (int c : col_idx) ++count[static_cast<std::size_t>(c) + 1];
    for (int c = 0; c < cols; ++c) count[c + 1] += count[c];
    t.row_ptr = count;
    t.col_idx.resize(col_idx.size());
    t.values.resize(values.size());
    std::vector<std::int64_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (int r = 0; r < rows; ++r) {
        for (std::int64_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e) {
            std::int64_t slot = cursor[col_idx[e]]++;
            t.col_idx[slot] = r;
            t.values[slot] = values[e];
        }
    }
    return t;
}

Matrix SparseMatrix::to_dense() const {
    Matrix d(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (std::int64_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e)
            d(r, col_idx[e]) += values[e];
    return d;
}

bool SparseMatrix::is_symmetric() const {
    if (rows != cols) return false;
    SparseMatrix t = transpose();
    return t.row_ptr == row_ptr && t.col_idx == col_idx && t.values == values;
}

bool SparseMatrix::has_zero_diagonal() const {
    for (int r = 0; r < rows; ++r)
        for (std::int64_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e)
            if (col_idx[e] == r && values[e] != 0.0) return false;
    return true;
}

void spmm_into(Matrix& out, const SparseMatrix& s, const Matrix& d, bool accumulate) {
    if (s.cols != d.rows()) throw Error("spmm: inner dimension mismatch");
    const int p = d.cols();
    if (!accumulate) {
        if (out.rows() != s.rows || out.cols() != p) out = Matrix(s.rows, p);
        else out.fill(0.0);
    } else if (out.rows() != s.rows || out.cols() != p) {
        throw Error("spmm: accumulate target shape mismatch");
    }
    for (int r = 0; r < s.rows; ++r) {
        double* __restrict orow = out.row(r);
        for (std::int64_t e = s.row_ptr[r]; e < s.row_ptr[r + 1]; ++e) {
            const double v = s.values[e];
            const double* __restrict drow = d.row(s.col_idx[e]);
            for (int j = 0; j < p; ++j) orow[j] += v * drow[j];
        }
    }
}

Matrix spmm(const SparseMatrix& s, const Matrix& d) {
    Matrix out;
    spmm_into(out, s, d);
    return out;
}

SparseMatrix binary_spgemm(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols != b.rows) throw Error("binary_spgemm: inner dimension mismatch");
    SparseMatrix out(a.rows, b.cols);
    std::vector<int> mark(b.cols, -1);
    std::vector<int> row_cols;
    for (int r = 0; r < a.rows; ++r) {
        row_cols.clear();
        for (std::int64_t e = a.row_ptr[r]; e < a.row_ptr[r + 1]; ++e) {
            const int k = a.col_idx[e];
            for (std::int64_t e2 = b.row_ptr[k]; e2 < b.row_ptr[k + 1]; ++e2) {
                const int c = b.col_idx[e2];
                if (mark[c] != r) {
                    mark[c] = r;
                    row_cols.push_back(c);
                }
            }
        }
        std::sort(row_cols.begin(), row_cols.end());
        for (int c : row_cols) {
            out.col_idx.push_back(c);
            out.values.push_back(1.0);
        }
        out.row_ptr[r + 1] = static_cast<std::int64_t>(out.col_idx.size());
    }
    return out;
}

SparseMatrix binary_union(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw Error("binary_union: shape mismatch");
    SparseMatrix out(a.rows, a.cols);
    for (int r = 0; r < a.rows; ++r) {
        std::int64_t i = a.row_ptr[r], j = b.row_ptr[r];
        const std::int64_t ia = a.row_ptr[r + 1], jb = b.row_ptr[r + 1];
        while (i < ia || j < jb) {
            int c;
            if (j >= jb || (i < ia && a.col_idx[i] <= b.col_idx[j])) {
                c = a.col_idx[i];
                if (j < jb && b.col_idx[j] == c) ++j;
                ++i;
            } else {
                c = b.col_idx[j];
                ++j;
            }
            out.col_idx.push_back(c);
            out.values.push_back(1.0);
        }
        out.row_ptr[r + 1] = static_cast<std::int64_t>(out.col_idx.size());
    }
    return out;
}

SparseMatrix drop_diagonal(const SparseMatrix& m) {
    SparseMatrix out(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r) {
        for (std::int64_t e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) {
            if (m.col_idx[e] == r) continue;
            out.col_idx.push_back(m.col_idx[e]);
            out.values.push_back(m.values[e]);
        }
        out.row_ptr[r + 1] = static_cast<std::int64_t>(out.col_idx.size());
    }
    return out;
}

SupportIndex SupportIndex::build(SparseMatrix support) {
    support.validate();
    if (support.rows != support.cols) throw Error("SupportIndex: support must be square");
    if (!support.has_zero_diagonal()) throw Error("SupportIndex: support must have zero diagonal");
    if (!support.is_symmetric()) throw Error("SupportIndex: support must be symmetric");

    SupportIndex s;
    s.mat = std::move(support);
    const std::int64_t nnz = s.mat.nnz();
    s.entry_row.resize(nnz);
    s.twin.resize(nnz);
    s.pair_id.assign(nnz, -1);

    for (int r = 0; r < s.mat.rows; ++r)
        for (std::int64_t e = s.mat.row_ptr[r]; e < s.mat.row_ptr[r + 1]; ++e)
            s.entry_row[e] = r;

    // twin via binary search in the mirrored row
    for (std::int64_t e = 0; e < nnz; ++e) {
        const int i = s.entry_row[e];
        const int j = s.mat.col_idx[e];
        const auto begin = s.mat.col_idx.begin() + s.mat.row_ptr[j];
        const auto end = s.mat.col_idx.begin() + s.mat.row_ptr[j + 1];
        const auto it = std::lower_bound(begin, end, i);
        if (it == end || *it != i) throw Error("SupportIndex: missing mirrored entry");
        s.twin[e] = static_cast<int>(s.mat.row_ptr[j] + (it - begin));
    }

    int next_pair = 0;
    for (std::int64_t e = 0; e < nnz; ++e) {
        if (s.pair_id[e] >= 0) continue;
        s.pair_id[e] = next_pair;
        s.pair_id[s.twin[e]] = next_pair;
        ++next_pair;
    }
    s.pair_count = next_pair;
    return s;
}

}  // namespace hoggcn
