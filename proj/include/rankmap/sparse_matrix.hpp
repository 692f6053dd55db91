#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "rankmap/cost.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/exact_sum.hpp"

namespace rankmap {

// Compressed-sparse-column matrix. Stored values are non-zero and finite, row
// indices are strictly increasing within each column, and col_ptr is a
// non-decreasing prefix of the entry array.
class SparseColMatrix {
public:
    SparseColMatrix() : col_ptr_(1, 0) {}

    SparseColMatrix(std::size_t rows, std::size_t cols,
                    std::vector<std::size_t> col_ptr,
                    std::vector<std::size_t> row_idx,
                    Vector values)
        : rows_(rows), cols_(cols),
          col_ptr_(std::move(col_ptr)), row_idx_(std::move(row_idx)), values_(std::move(values)) {
        validate();
    }

    // Builds from per-column (row, value) lists; each list must be sorted by
    // strictly increasing row.
    static SparseColMatrix from_columns(
        std::size_t rows,
        const std::vector<std::vector<std::pair<std::size_t, double>>>& cols) {
        SparseColMatrix s;
        s.rows_ = rows;
        s.cols_ = cols.size();
        s.col_ptr_.assign(1, 0);
        for (const auto& c : cols) {
            for (const auto& [r, v] : c) {
                s.row_idx_.push_back(r);
                s.values_.push_back(v);
            }
            s.col_ptr_.push_back(s.row_idx_.size());
        }
        s.validate();
        return s;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    const std::vector<std::size_t>& col_ptr() const { return col_ptr_; }
    const std::vector<std::size_t>& row_idx() const { return row_idx_; }
    const Vector& values() const { return values_; }

    DenseMatrix densify() const {
        DenseMatrix d(rows_, cols_);
        for (std::size_t j = 0; j < cols_; ++j)
            for (std::size_t t = col_ptr_[j]; t < col_ptr_[j + 1]; ++t)
                d(row_idx_[t], j) = values_[t];
        return d;
    }

    bool operator==(const SparseColMatrix& o) const = default;

private:
    void validate() const {
        if (col_ptr_.size() != cols_ + 1)
            throw DimensionError("SparseColMatrix: col_ptr must have cols+1 entries");
        if (col_ptr_.front() != 0 || col_ptr_.back() != values_.size() ||
            row_idx_.size() != values_.size())
            throw DimensionError("SparseColMatrix: col_ptr does not index the entry arrays");
        for (std::size_t j = 0; j < cols_; ++j) {
            if (col_ptr_[j] > col_ptr_[j + 1])
                throw InvalidArgumentError("SparseColMatrix: col_ptr must be non-decreasing");
            for (std::size_t t = col_ptr_[j]; t < col_ptr_[j + 1]; ++t) {
                if (row_idx_[t] >= rows_)
                    throw InvalidArgumentError("SparseColMatrix: row index out of range");
                if (t > col_ptr_[j] && row_idx_[t] <= row_idx_[t - 1])
                    throw InvalidArgumentError("SparseColMatrix: row indices must strictly increase within a column");
                if (values_[t] == 0.0 || !std::isfinite(values_[t]))
                    throw InvalidArgumentError("SparseColMatrix: stored values must be non-zero and finite");
            }
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> col_ptr_;
    std::vector<std::size_t> row_idx_;
    Vector values_;
};

// y = S x (or Sᵀ x), touching stored entries only; counts exactly nnz
// multiplications and nnz additions.
//
// The no-transpose product gathers contributions from many columns into each
// output entry, so those sums run through ExactAccumulator and are rounded
// once: any column-range split of the same computation merges to bit-identical
// output, which the distributed execution model relies on. The transpose
// product is one sequential dot per column and needs no such treatment.
inline Vector sparse_matvec(const SparseColMatrix& s, const Vector& x, bool transpose, CostContext& ctx) {
    const auto& cp = s.col_ptr();
    const auto& ri = s.row_idx();
    const auto& vs = s.values();
    if (!transpose) {
        if (x.size() != s.cols()) throw DimensionError("sparse_matvec: x length must equal cols");
        std::vector<ExactAccumulator> acc(s.rows());
        for (std::size_t j = 0; j < s.cols(); ++j) {
            const double xj = x[j];
            for (std::size_t t = cp[j]; t < cp[j + 1]; ++t) acc[ri[t]].add(vs[t] * xj);
        }
        Vector y(s.rows());
        for (std::size_t i = 0; i < s.rows(); ++i) y[i] = acc[i].round();
        ctx.count_mults(s.nnz());
        ctx.count_adds(s.nnz());
        return y;
    }
    if (x.size() != s.rows()) throw DimensionError("sparse_matvec: x length must equal rows");
    Vector y(s.cols(), 0.0);
    for (std::size_t j = 0; j < s.cols(); ++j) {
        double acc = 0.0;
        for (std::size_t t = cp[j]; t < cp[j + 1]; ++t) acc += vs[t] * x[ri[t]];
        y[j] = acc;
    }
    ctx.count_mults(s.nnz());
    ctx.count_adds(s.nnz());
    return y;
}

inline Vector sparse_matvec(const SparseColMatrix& s, const Vector& x, bool transpose = false) {
    CostContext ctx;
    return sparse_matvec(s, x, transpose, ctx);
}

}  // namespace rankmap
