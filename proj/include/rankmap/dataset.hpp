#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/rng.hpp"

namespace rankmap {

enum class DatasetKind { low_rank, union_of_subspaces, block_diagonal_v, file };

inline const char* to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::low_rank: return "low_rank";
        case DatasetKind::union_of_subspaces: return "union_of_subspaces";
        case DatasetKind::block_diagonal_v: return "block_diagonal_v";
        default: return "file";
    }
}

struct DatasetSpec {
    DatasetKind kind = DatasetKind::low_rank;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t rank = 0;       // r: overall rank, or per-subspace dimension
    std::size_t subspaces = 1;  // K, union/block kinds only
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string path;  // kind == file only
};

namespace detail {

// Gaussian columns orthonormalized by two Gram-Schmidt passes.
inline DenseMatrix random_orthonormal(std::size_t m, std::size_t cols, Rng& rng) {
    DenseMatrix b(m, cols);
    for (std::size_t j = 0; j < cols; ++j) {
        Vector v(m);
        for (double& e : v) e = rng.gaussian();
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t k = 0; k < j; ++k) {
                double dot = 0.0;
                for (std::size_t i = 0; i < m; ++i) dot += b(i, k) * v[i];
                for (std::size_t i = 0; i < m; ++i) v[i] -= dot * b(i, k);
            }
        double nsq = 0.0;
        for (double e : v) nsq += e * e;
        const double inv = 1.0 / std::sqrt(nsq);
        for (std::size_t i = 0; i < m; ++i) b(i, j) = v[i] * inv;
    }
    return b;
}

inline void add_noise(DenseMatrix& a, double noise, Rng& rng) {
    if (noise == 0.0) return;
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) += noise * rng.gaussian();
}

}  // namespace detail

inline DenseMatrix generate(const DatasetSpec& spec) {
    if (spec.kind == DatasetKind::file)
        throw InvalidArgumentError("generate: file datasets are loaded, not generated");
    if (spec.m == 0 || spec.n == 0) throw DimensionError("generate: dimensions must be positive");
    if (spec.rank == 0) throw InvalidArgumentError("generate: rank must be positive");
    if (spec.rank >= spec.m)
        throw InvalidArgumentError("generate: rank must be below the row count");
    if (!(spec.noise >= 0.0)) throw InvalidArgumentError("generate: noise must be non-negative");

    Rng rng(spec.seed);

    if (spec.kind == DatasetKind::low_rank) {
        DenseMatrix u(spec.m, spec.rank), w(spec.rank, spec.n);
        for (std::size_t j = 0; j < spec.rank; ++j)
            for (std::size_t i = 0; i < spec.m; ++i) u(i, j) = rng.gaussian();
        for (std::size_t j = 0; j < spec.n; ++j)
            for (std::size_t i = 0; i < spec.rank; ++i) w(i, j) = rng.gaussian();
        DenseMatrix a(spec.m, spec.n);
        for (std::size_t j = 0; j < spec.n; ++j)
            for (std::size_t i = 0; i < spec.m; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < spec.rank; ++k) s += u(i, k) * w(k, j);
                a(i, j) = s;
            }
        detail::add_noise(a, spec.noise, rng);
        return a;
    }

    if (spec.subspaces == 0) throw InvalidArgumentError("generate: need at least one subspace");

    if (spec.kind == DatasetKind::union_of_subspaces) {
        std::vector<DenseMatrix> bases;
        bases.reserve(spec.subspaces);
        for (std::size_t k = 0; k < spec.subspaces; ++k)
            bases.push_back(detail::random_orthonormal(spec.m, spec.rank, rng));
        DenseMatrix a(spec.m, spec.n);
        for (std::size_t j = 0; j < spec.n; ++j) {
            const DenseMatrix& b = bases[rng.index(spec.subspaces)];
            Vector coef(spec.rank);
            for (double& c : coef) c = rng.gaussian();
            for (std::size_t i = 0; i < spec.m; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < spec.rank; ++k) s += b(i, k) * coef[k];
                a(i, j) = s;
            }
        }
        detail::add_noise(a, spec.noise, rng);
        return a;
    }

    // block_diagonal_v: A = D V with orthonormal D (K*r atoms) and V whose
    // column chunk k touches only rows [k*r, (k+1)*r). Columns are assigned
    // to chunks contiguously with the same balanced split the distributed
    // executor uses, so a worker per block sees a perfectly aligned layout.
    const std::size_t l = spec.subspaces * spec.rank;
    if (l > spec.m)
        throw InvalidArgumentError("generate: subspaces*rank atoms exceed the row count");
    const DenseMatrix d = detail::random_orthonormal(spec.m, l, rng);
    DenseMatrix a(spec.m, spec.n);
    const std::size_t base = spec.n / spec.subspaces, rem = spec.n % spec.subspaces;
    std::size_t j = 0;
    for (std::size_t k = 0; k < spec.subspaces; ++k) {
        const std::size_t chunk = base + (k < rem ? 1 : 0);
        for (std::size_t c = 0; c < chunk; ++c, ++j) {
            Vector coef(spec.rank);
            for (double& e : coef) e = rng.gaussian();
            for (std::size_t i = 0; i < spec.m; ++i) {
                double s = 0.0;
                for (std::size_t t = 0; t < spec.rank; ++t) s += d(i, k * spec.rank + t) * coef[t];
                a(i, j) = s;
            }
        }
    }
    detail::add_noise(a, spec.noise, rng);
    return a;
}

}  // namespace rankmap
