#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "rankmap/cost.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"

namespace rankmap {

// Householder QR with column pivoting. Pivoting makes the leading diagonal of
// R the largest, so numerical rank is the count of leading diagonals above
// max(rows, cols) * eps * |R(0,0)|. Used for every pseudoinverse application
// in this library; normal equations are never formed.
class ColPivQr {
public:
    ColPivQr(const DenseMatrix& b, CostContext& ctx)
        : m_(b.rows()), k_(b.cols()), qr_(b), tau_(std::min(m_, k_), 0.0), perm_(k_) {
        if (m_ == 0 || k_ == 0) throw DimensionError("ColPivQr: empty matrix");
        for (std::size_t j = 0; j < k_; ++j) perm_[j] = j;
        factor(ctx);
    }

    std::size_t rank() const { return rank_; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return k_; }

    // Orthogonal projection of each column of t onto the column space of the
    // factored matrix (the rank-detected subspace).
    DenseMatrix project(const DenseMatrix& t, CostContext& ctx) const {
        if (t.rows() != m_) throw DimensionError("ColPivQr::project: row count mismatch");
        DenseMatrix out(t);
        for (std::size_t j = 0; j < t.cols(); ++j) project_inplace(out.col(j), ctx);
        return out;
    }

    // In-place projection of one m-vector.
    void project_inplace(double* v, CostContext& ctx) const {
        apply_qt(v, ctx);
        for (std::size_t i = rank_; i < m_; ++i) v[i] = 0.0;
        apply_q(v, ctx);
    }

    // Least-squares coefficients for one right-hand side, in source column
    // order. Columns beyond the detected rank receive zero.
    Vector solve(const Vector& rhs, CostContext& ctx) const {
        if (rhs.size() != m_) throw DimensionError("ColPivQr::solve: rhs length mismatch");
        Vector w(rhs);
        apply_qt(w.data(), ctx);
        Vector c(k_, 0.0);
        for (std::size_t s = rank_; s-- > 0;) {
            double acc = w[s];
            for (std::size_t j = s + 1; j < rank_; ++j) acc -= qr_(s, j) * c[j];
            c[s] = acc / qr_(s, s);
        }
        ctx.count_mults(rank_ * (rank_ + 1) / 2);
        ctx.count_adds(rank_ * (rank_ + 1) / 2);
        Vector out(k_, 0.0);
        for (std::size_t j = 0; j < k_; ++j) out[perm_[j]] = c[j];
        return out;
    }

private:
    void factor(CostContext& ctx) {
        const std::size_t steps = std::min(m_, k_);
        std::size_t s = 0;
        for (; s < steps; ++s) {
            // Pivot: remaining column with the largest trailing norm.
            std::size_t best = s;
            double best_sq = -1.0;
            for (std::size_t j = s; j < k_; ++j) {
                double acc = 0.0;
                const double* col = qr_.col(j);
                for (std::size_t i = s; i < m_; ++i) acc += col[i] * col[i];
                if (acc > best_sq) {
                    best_sq = acc;
                    best = j;
                }
            }
            ctx.count_mults((m_ - s) * (k_ - s));
            ctx.count_adds((m_ - s) * (k_ - s));
            if (best != s) {
                double* a = qr_.col(s);
                double* b = qr_.col(best);
                for (std::size_t i = 0; i < m_; ++i) std::swap(a[i], b[i]);
                std::swap(perm_[s], perm_[best]);
            }
            const double norm = std::sqrt(best_sq);
            if (norm == 0.0) break;  // all remaining columns are zero

            // Householder reflector H = I - tau w wᵀ with w(s) = 1 mapping the
            // trailing column onto alpha e_s; the sign choice avoids
            // cancellation in w(s).
            double* col = qr_.col(s);
            const double x0 = col[s];
            const double alpha = x0 >= 0.0 ? -norm : norm;
            const double u0 = x0 - alpha;
            double usq = u0 * u0;
            for (std::size_t i = s + 1; i < m_; ++i) usq += col[i] * col[i];
            tau_[s] = 2.0 * u0 * u0 / usq;
            const double inv_u0 = 1.0 / u0;
            for (std::size_t i = s + 1; i < m_; ++i) col[i] *= inv_u0;
            col[s] = alpha;

            for (std::size_t j = s + 1; j < k_; ++j) {
                double* cj = qr_.col(j);
                double d = cj[s];
                for (std::size_t i = s + 1; i < m_; ++i) d += qr_(i, s) * cj[i];
                const double td = tau_[s] * d;
                cj[s] -= td;
                for (std::size_t i = s + 1; i < m_; ++i) cj[i] -= td * qr_(i, s);
            }
            ctx.count_mults(2 * (m_ - s) * (k_ - s - 1) + (m_ - s));
            ctx.count_adds(2 * (m_ - s) * (k_ - s - 1));
        }
        const double eps = std::numeric_limits<double>::epsilon();
        const double tol = static_cast<double>(std::max(m_, k_)) * eps * std::abs(qr_(0, 0));
        rank_ = 0;
        while (rank_ < s && std::abs(qr_(rank_, rank_)) > tol) ++rank_;
    }

    // v <- Qᵀ v (reflectors applied first to last).
    void apply_qt(double* v, CostContext& ctx) const {
        for (std::size_t s = 0; s < rank_; ++s) reflect(s, v);
        ctx.count_mults(2 * rank_ * m_);
        ctx.count_adds(2 * rank_ * m_);
    }

    // v <- Q v (reflectors applied last to first).
    void apply_q(double* v, CostContext& ctx) const {
        for (std::size_t s = rank_; s-- > 0;) reflect(s, v);
        ctx.count_mults(2 * rank_ * m_);
        ctx.count_adds(2 * rank_ * m_);
    }

    void reflect(std::size_t s, double* v) const {
        double d = v[s];
        for (std::size_t i = s + 1; i < m_; ++i) d += qr_(i, s) * v[i];
        const double td = tau_[s] * d;
        v[s] -= td;
        for (std::size_t i = s + 1; i < m_; ++i) v[i] -= td * qr_(i, s);
    }

    std::size_t m_;
    std::size_t k_;
    DenseMatrix qr_;
    Vector tau_;
    std::vector<std::size_t> perm_;
    std::size_t rank_ = 0;
};

// Projection of each target column onto the column space of basis. The basis
// must have full column rank; otherwise an IllConditionedError carries the
// rank the pivoted factorization detected.
inline DenseMatrix least_squares_project(const DenseMatrix& basis, const DenseMatrix& targets,
                                         CostContext& ctx) {
    ColPivQr qr(basis, ctx);
    if (qr.rank() < basis.cols())
        throw IllConditionedError("least_squares_project: basis is rank-deficient", qr.rank());
    return qr.project(targets, ctx);
}

inline DenseMatrix least_squares_project(const DenseMatrix& basis, const DenseMatrix& targets) {
    CostContext ctx;
    return least_squares_project(basis, targets, ctx);
}

}  // namespace rankmap
