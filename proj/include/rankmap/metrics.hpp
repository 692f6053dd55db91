#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "rankmap/cssd.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"

namespace rankmap {

// Mean squared difference between a signal and its reconstruction.
inline double mse(const Vector& y, const Vector& yhat) {
    if (y.size() != yhat.size()) throw DimensionError("mse: length mismatch");
    if (y.empty()) throw DegenerateInputError("mse: empty signal");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        s += d * d;
    }
    return s / static_cast<double>(y.size());
}

// Reconstruction quality in dB, 10*log10(max_value / sqrt(mse)). Note the
// single power of max_value and the root of the error: this scale is half of
// the more common peak-signal formula. A perfect reconstruction reports +inf.
inline double psnr_from_mse(double max_value, double mse_value) {
    if (!(max_value > 0.0)) throw InvalidArgumentError("psnr: max_value must be positive");
    if (!(mse_value >= 0.0)) throw InvalidArgumentError("psnr: mse must be non-negative");
    if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_value / std::sqrt(mse_value));
}

inline double psnr(const Vector& original, const Vector& reconstructed, double max_value) {
    return psnr_from_mse(max_value, mse(original, reconstructed));
}

// Relative l2 distance of an approximate result from its reference; serves
// solution vectors and eigenvalue vectors alike.
inline double learning_error(const Vector& reference, const Vector& approx) {
    if (reference.size() != approx.size()) throw DimensionError("learning_error: length mismatch");
    double dsq = 0.0, rsq = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference[i] - approx[i];
        dsq += d * d;
        rsq += reference[i] * reference[i];
    }
    if (rsq == 0.0) throw DegenerateInputError("learning_error: zero reference");
    return std::sqrt(dsq) / std::sqrt(rsq);
}

// Sparse-representation classification: coefficients vote for their class by
// absolute mass. no_support marks the degenerate all-zero vector, where the
// returned class is just the lowest label.
struct Classification {
    std::size_t class_id = 0;
    std::map<std::size_t, double> scores;
    bool no_support = false;
};

inline Classification classify(const Vector& x, const std::vector<std::size_t>& labels) {
    if (x.empty()) throw DegenerateInputError("classify: empty coefficient vector");
    if (labels.size() != x.size()) throw DimensionError("classify: one label per coefficient");
    Classification out;
    for (std::size_t i = 0; i < x.size(); ++i) out.scores[labels[i]] += std::abs(x[i]);
    double best = -1.0;
    for (const auto& [cls, score] : out.scores) {
        if (score > best) {
            best = score;
            out.class_id = cls;
        }
    }
    out.no_support = best == 0.0;
    return out;
}

// Stored-entry comparison of representations of one m x n matrix: the matrix
// itself, dictionary plus dense coefficients, and dictionary plus sparse
// coefficients. rankmap_with_index additionally charges one index per stored
// coefficient; `beneficial` uses that honest count.
struct MemoryTable {
    std::uint64_t original = 0;
    std::uint64_t least_squares = 0;
    std::uint64_t rankmap = 0;
    std::uint64_t rankmap_with_index = 0;
    double least_squares_ratio = 0.0;
    double rankmap_ratio = 0.0;
    bool beneficial = false;
};

inline MemoryTable memory_table(std::size_t m, std::size_t n, std::size_t l, std::uint64_t nnz_v) {
    if (m == 0 || n == 0 || l == 0) throw DimensionError("memory_table: empty dimensions");
    MemoryTable t;
    t.original = static_cast<std::uint64_t>(m) * n;
    t.least_squares = static_cast<std::uint64_t>(m) * l + static_cast<std::uint64_t>(l) * n;
    t.rankmap = static_cast<std::uint64_t>(m) * l + nnz_v;
    t.rankmap_with_index = t.rankmap + nnz_v;
    t.least_squares_ratio = static_cast<double>(t.least_squares) / static_cast<double>(t.original);
    t.rankmap_ratio = static_cast<double>(t.rankmap) / static_cast<double>(t.original);
    t.beneficial = t.rankmap_with_index < t.least_squares;
    return t;
}

inline MemoryTable memory_table(const DenseMatrix& a, const Factorization& f) {
    return memory_table(a.rows(), a.cols(), f.l(), f.nnz());
}

// Signal synthesized from a coefficient vector through the factorization,
// D(Vx); the natural order costs nnz(V) + l·m multiplications.
inline Vector reconstruct(const DenseMatrix& d, const SparseColMatrix& v, const Vector& x,
                          CostContext& ctx) {
    if (d.cols() != v.rows())
        throw DimensionError("reconstruct: dictionary atoms and coefficient rows disagree");
    const Vector t = sparse_matvec(v, x, false, ctx);
    return dense_matvec(d, t, false, ctx);
}

// Stopping rule for ist_solve: accept once the reconstruction of the iterate
// reaches target_db against the reference signal. The factorization and the
// reference are copied so the rule outlives its inputs; the cost context is
// held by reference and must outlive the solve.
inline std::function<bool(const Vector&, std::size_t)> make_psnr_stop(
    const DenseMatrix& d, const SparseColMatrix& v, Vector reference, double max_value,
    double target_db, CostContext& ctx) {
    if (reference.size() != d.rows())
        throw DimensionError("make_psnr_stop: reference length must equal signal rows");
    if (!(max_value > 0.0))
        throw InvalidArgumentError("make_psnr_stop: max_value must be positive");
    return [d, v, ref = std::move(reference), max_value, target_db,
            &ctx](const Vector& x, std::size_t) {
        return psnr(ref, reconstruct(d, v, x, ctx), max_value) >= target_db;
    };
}

}  // namespace rankmap
