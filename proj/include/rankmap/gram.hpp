#pragma once

#include <cstddef>
#include <optional>

#include "rankmap/cost.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/sparse_matrix.hpp"

namespace rankmap {

enum class GramKind { full, factored };

// Applies G = AᵀA without ever forming it, either from A itself or from a
// factorization A ~= D V. The multiplication counts are part of the contract:
//   full:     z = Aᵀ(A x)          2·m·n per apply
//   factored: z = Vᵀ(Dᵀ(D(V x)))   2·(nnz(V) + l·m) per apply
// An opt-in cached mode folds the two dense hops into a precomputed DᵀD,
// trading l·m·(l+1)/2 setup multiplications for l² per apply; its counters
// report the flow that actually runs.
class GramOperator {
public:
    static GramOperator full(const DenseMatrix& a) {
        GramOperator g;
        g.kind_ = GramKind::full;
        g.a_ = &a;
        g.rows_ = a.rows();
        g.dim_ = a.cols();
        return g;
    }

    static GramOperator factored(const DenseMatrix& d, const SparseColMatrix& v) {
        if (d.cols() != v.rows())
            throw DimensionError("GramOperator: dictionary cols must equal coefficient rows");
        GramOperator g;
        g.kind_ = GramKind::factored;
        g.d_ = &d;
        g.v_ = &v;
        g.rows_ = d.rows();
        g.dim_ = v.cols();
        return g;
    }

    // Same operator with DᵀD formed up front; the setup work lands on ctx.
    static GramOperator factored_cached(const DenseMatrix& d, const SparseColMatrix& v,
                                        CostContext& ctx) {
        GramOperator g = factored(d, v);
        const std::size_t l = d.cols();
        DenseMatrix gram(l, l);
        for (std::size_t p = 0; p < l; ++p) {
            for (std::size_t q = p; q < l; ++q) {
                const double* cp = d.col(p);
                const double* cq = d.col(q);
                double acc = 0.0;
                for (std::size_t i = 0; i < d.rows(); ++i) acc += cp[i] * cq[i];
                gram(p, q) = acc;
                gram(q, p) = acc;
            }
        }
        ctx.count_mults(d.rows() * l * (l + 1) / 2);
        ctx.count_adds(d.rows() * l * (l + 1) / 2);
        g.cached_gram_.emplace(std::move(gram));
        return g;
    }

    GramKind kind() const { return kind_; }
    bool cached() const { return cached_gram_.has_value(); }
    std::size_t dim() const { return dim_; }          // operator acts on R^dim
    std::size_t ambient_rows() const { return rows_; }  // rows of A (or D)

    const DenseMatrix& dictionary() const { return *d_; }
    const SparseColMatrix& coefficients() const { return *v_; }

    // z = G x
    Vector apply(const Vector& x, CostContext& ctx) const {
        if (x.size() != dim_) throw DimensionError("GramOperator::apply: x length mismatch");
        if (kind_ == GramKind::full) {
            const Vector ax = dense_matvec(*a_, x, false, ctx);
            return dense_matvec(*a_, ax, true, ctx);
        }
        const Vector w = sparse_matvec(*v_, x, false, ctx);
        Vector t;
        if (cached_gram_) {
            t = dense_matvec(*cached_gram_, w, false, ctx);
        } else {
            const Vector u = dense_matvec(*d_, w, false, ctx);
            t = dense_matvec(*d_, u, true, ctx);
        }
        return sparse_matvec(*v_, t, true, ctx);
    }

    // b = Aᵀ y, the correlation of an ambient vector with every column.
    Vector correlate(const Vector& y, CostContext& ctx) const {
        if (y.size() != rows_) throw DimensionError("GramOperator::correlate: y length mismatch");
        if (kind_ == GramKind::full) return dense_matvec(*a_, y, true, ctx);
        const Vector t = dense_matvec(*d_, y, true, ctx);
        return sparse_matvec(*v_, t, true, ctx);
    }

    // y = A x, the ambient reconstruction.
    Vector reconstruct(const Vector& x, CostContext& ctx) const {
        if (x.size() != dim_) throw DimensionError("GramOperator::reconstruct: x length mismatch");
        if (kind_ == GramKind::full) return dense_matvec(*a_, x, false, ctx);
        const Vector w = sparse_matvec(*v_, x, false, ctx);
        return dense_matvec(*d_, w, false, ctx);
    }

    // Stored entries backing one application, by convention:
    //   full:     m·n + n + m        (matrix plus both work vectors)
    //   factored: 2·nnz(V) + l·m + n + m   (indices and values, dictionary,
    //                                       coefficient-space and ambient work)
    std::uint64_t memory_entries() const {
        if (kind_ == GramKind::full)
            return static_cast<std::uint64_t>(rows_) * dim_ + dim_ + rows_;
        return 2 * static_cast<std::uint64_t>(v_->nnz()) +
               static_cast<std::uint64_t>(d_->cols()) * rows_ + dim_ + rows_;
    }

private:
    GramOperator() = default;

    GramKind kind_ = GramKind::full;
    const DenseMatrix* a_ = nullptr;
    const DenseMatrix* d_ = nullptr;
    const SparseColMatrix* v_ = nullptr;
    std::optional<DenseMatrix> cached_gram_;
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
};

}  // namespace rankmap
