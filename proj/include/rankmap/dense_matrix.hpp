#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rankmap/cost.hpp"
#include "rankmap/errors.hpp"

namespace rankmap {

using Vector = std::vector<double>;

inline void require_finite(const Vector& v, const char* who) {
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidArgumentError(std::string(who) + ": non-finite entry");
}

// Dense column-major matrix of doubles. Constructors reject non-finite
// entries; kernels preserve finiteness for finite inputs.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    DenseMatrix(std::size_t rows, std::size_t cols, Vector data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw DimensionError("DenseMatrix: data size does not match rows*cols");
        require_finite(data_, "DenseMatrix");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    double* col(std::size_t j) { return data_.data() + j * rows_; }
    const double* col(std::size_t j) const { return data_.data() + j * rows_; }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    bool operator==(const DenseMatrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

// y = M x (or Mᵀ x). Each output entry is a left-to-right sequential sum over
// the input index, which is the order every equivalence test in this library
// assumes; nothing here may reassociate it. Counts rows*cols multiplications
// and additions.
inline Vector dense_matvec(const DenseMatrix& m, const Vector& x, bool transpose, CostContext& ctx) {
    const std::size_t r = m.rows();
    const std::size_t c = m.cols();
    if (!transpose) {
        if (x.size() != c) throw DimensionError("dense_matvec: x length must equal cols");
        Vector y(r, 0.0);
        for (std::size_t j = 0; j < c; ++j) {
            const double* col = m.col(j);
            const double xj = x[j];
            for (std::size_t i = 0; i < r; ++i) y[i] += col[i] * xj;
        }
        ctx.count_mults(static_cast<std::uint64_t>(r) * c);
        ctx.count_adds(static_cast<std::uint64_t>(r) * c);
        return y;
    }
    if (x.size() != r) throw DimensionError("dense_matvec: x length must equal rows");
    Vector y(c, 0.0);
    for (std::size_t j = 0; j < c; ++j) {
        const double* col = m.col(j);
        double acc = 0.0;
        for (std::size_t i = 0; i < r; ++i) acc += col[i] * x[i];
        y[j] = acc;
    }
    ctx.count_mults(static_cast<std::uint64_t>(r) * c);
    ctx.count_adds(static_cast<std::uint64_t>(r) * c);
    return y;
}

inline Vector dense_matvec(const DenseMatrix& m, const Vector& x, bool transpose = false) {
    CostContext ctx;
    return dense_matvec(m, x, transpose, ctx);
}

// C = A B with sequential per-entry sums. Counts rows(A)*cols(A)*cols(B) MACs.
inline DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b, CostContext& ctx) {
    if (a.cols() != b.rows()) throw DimensionError("dense_matmul: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const double* bcol = b.col(j);
        double* ccol = c.col(j);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double* acol = a.col(k);
            const double bkj = bcol[k];
            for (std::size_t i = 0; i < a.rows(); ++i) ccol[i] += acol[i] * bkj;
        }
    }
    const std::uint64_t macs =
        static_cast<std::uint64_t>(a.rows()) * a.cols() * b.cols();
    ctx.count_mults(macs);
    ctx.count_adds(macs);
    return c;
}

// Euclidean norm of every column, each a sequential sum of squares.
inline Vector column_norms(const DenseMatrix& m, CostContext& ctx) {
    Vector out(m.cols(), 0.0);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const double* col = m.col(j);
        double acc = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) acc += col[i] * col[i];
        out[j] = std::sqrt(acc);
    }
    ctx.count_mults(static_cast<std::uint64_t>(m.rows()) * m.cols());
    ctx.count_adds(static_cast<std::uint64_t>(m.rows()) * m.cols());
    return out;
}

inline Vector column_norms(const DenseMatrix& m) {
    CostContext ctx;
    return column_norms(m, ctx);
}

}  // namespace rankmap
