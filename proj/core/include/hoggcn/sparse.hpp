#pragma once

#include <cstdint>
#include <vector>

#include "hoggcn/matrix.hpp"

namespace hoggcn {

/// Compressed-sparse-row matrix. Column indices are strictly increasing
/// within each row; row_ptr.back() equals the number of stored values.
struct SparseMatrix {
    int rows = 0, cols = 0;
    std::vector<std::int64_t> row_ptr;  // size rows + 1
    std::vector<int> col_idx;
    std::vector<double> values;

    SparseMatrix() = default;
    SparseMatrix(int r, int c) : rows(r), cols(c), row_ptr(static_cast<std::size_t>(r) + 1, 0) {}

    std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx.size()); }

    /// Build from (row, col, value) triplets; duplicate coordinates are summed.
    static SparseMatrix from_triplets(int rows, int cols,
                                      std::vector<std::int64_t> rows_idx,
                                      std::vector<int> cols_idx,
                                      std::vector<double> vals);

    /// Structure check: throws Error on malformed CSR.
    void validate() const;

    SparseMatrix transpose() const;
    Matrix to_dense() const;

    bool structure_equals(const SparseMatrix& o) const {
        return rows == o.rows && cols == o.cols && row_ptr == o.row_ptr && col_idx == o.col_idx;
    }
    bool operator==(const SparseMatrix& o) const {
        return structure_equals(o) && values == o.values;
    }

    /// True iff (i,j) stored implies (j,i) stored with the same value.
    bool is_symmetric() const;
    bool has_zero_diagonal() const;
};

/// out = s * d  (CSR times dense), d: (s.cols, p).
void spmm_into(Matrix& out, const SparseMatrix& s, const Matrix& d, bool accumulate = false);
Matrix spmm(const SparseMatrix& s, const Matrix& d);

/// Support (0/1 values) of the product a*b for nonnegative inputs.
SparseMatrix binary_spgemm(const SparseMatrix& a, const SparseMatrix& b);
/// Support union, values all 1.
SparseMatrix binary_union(const SparseMatrix& a, const SparseMatrix& b);
/// Copy with diagonal entries removed.
SparseMatrix drop_diagonal(const SparseMatrix& m);

/// A symmetric zero-diagonal support with the entry indexing the model needs:
/// every stored entry knows its row, its mirrored entry, and the id of its
/// unordered pair. Edge-valued tensors are stored per entry in CSR order;
/// unordered parameters (one per pair) expand through pair_id.
struct SupportIndex {
    SparseMatrix mat;              // binary, symmetric, zero diagonal
    std::vector<int> entry_row;    // row of each stored entry
    std::vector<int> twin;         // index of the (j,i) entry for each (i,j)
    std::vector<int> pair_id;      // unordered pair id, shared by twins
    int pair_count = 0;

    int nodes() const { return mat.rows; }
    std::int64_t entries() const { return mat.nnz(); }

    static SupportIndex build(SparseMatrix support);
};

}  // namespace hoggcn
