#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "rankmap/cost.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/rng.hpp"
#include "rankmap/sparse_matrix.hpp"

using rankmap::CostContext;
using rankmap::DenseMatrix;
using rankmap::SparseColMatrix;
using rankmap::Vector;

namespace {

DenseMatrix random_dense(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    rankmap::Rng rng(seed);
    DenseMatrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
    return m;
}

Vector random_vec(std::size_t n, std::uint64_t seed) {
    rankmap::Rng rng(seed);
    Vector v(n);
    for (double& x : v) x = rng.gaussian();
    return v;
}

// The reference semantics: every output entry is an independent sequential
// sum in ascending input order.
Vector naive_matvec(const DenseMatrix& m, const Vector& x, bool transpose) {
    if (!transpose) {
        Vector y(m.rows(), 0.0);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }
    Vector y(m.cols(), 0.0);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) acc += m(i, j) * x[i];
        y[j] = acc;
    }
    return y;
}

}  // namespace

TEST_CASE("dense matrix layout and validation") {
    DenseMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(m(0, 0) == 1);
    CHECK(m(1, 0) == 2);  // column-major: column 0 is {1, 2}
    CHECK(m(0, 1) == 3);
    CHECK(m.col(2)[1] == 6);

    CHECK_THROWS_AS(DenseMatrix(2, 2, {1, 2, 3}), rankmap::DimensionError);
    CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, std::nan("")}), rankmap::Error);
    CHECK_THROWS_AS(DenseMatrix(1, 1, {std::numeric_limits<double>::infinity()}), rankmap::Error);

    DenseMatrix same(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(m == same);
    same(1, 2) = 7;
    CHECK(!(m == same));
}

TEST_CASE("dense matvec is bitwise equal to the per-entry reference") {
    const DenseMatrix m = random_dense(17, 23, 11);
    const Vector x = random_vec(23, 12), xt = random_vec(17, 13);

    const Vector y = dense_matvec(m, x, false);
    const Vector ref = naive_matvec(m, x, false);
    REQUIRE(y.size() == ref.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == ref[i]);

    const Vector yt = dense_matvec(m, xt, true);
    const Vector reft = naive_matvec(m, xt, true);
    REQUIRE(yt.size() == reft.size());
    for (std::size_t i = 0; i < yt.size(); ++i) CHECK(yt[i] == reft[i]);
}

TEST_CASE("dense matvec counters and dimension checks") {
    const DenseMatrix m = random_dense(5, 9, 3);
    CostContext ctx;
    dense_matvec(m, random_vec(9, 4), false, ctx);
    CHECK(ctx.counters().multiplications == 45);
    CHECK(ctx.counters().additions == 45);
    ctx.reset();
    dense_matvec(m, random_vec(5, 4), true, ctx);
    CHECK(ctx.counters().multiplications == 45);
    CHECK(ctx.counters().additions == 45);

    CHECK_THROWS_AS(dense_matvec(m, random_vec(5, 1), false), rankmap::DimensionError);
    CHECK_THROWS_AS(dense_matvec(m, random_vec(9, 1), true), rankmap::DimensionError);
}

TEST_CASE("dense matmul matches the triple loop") {
    const DenseMatrix a = random_dense(6, 4, 21);
    const DenseMatrix b = random_dense(4, 5, 22);
    CostContext ctx;
    const DenseMatrix c = dense_matmul(a, b, ctx);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 4; ++k) acc += a(i, k) * b(k, j);
            CHECK(c(i, j) == Catch::Approx(acc).epsilon(1e-14));
        }
    }
    CHECK(ctx.counters().multiplications == 6 * 4 * 5);
    CHECK_THROWS_AS(dense_matmul(a, a, ctx), rankmap::DimensionError);
}

TEST_CASE("column norms") {
    const DenseMatrix m(2, 2, {3, 4, 0, 0});
    CostContext ctx;
    const Vector n = column_norms(m, ctx);
    CHECK(n[0] == 5.0);
    CHECK(n[1] == 0.0);
    CHECK(ctx.counters().multiplications == 4);
    CHECK(ctx.counters().additions == 4);
}

TEST_CASE("sparse matrix construction and validation") {
    // 4x3: col0 {0: 1.5, 2: -2}, col1 empty, col2 {3: 4}
    const SparseColMatrix s = SparseColMatrix::from_columns(
        4, {{{0, 1.5}, {2, -2.0}}, {}, {{3, 4.0}}});
    CHECK(s.rows() == 4);
    CHECK(s.cols() == 3);
    CHECK(s.nnz() == 3);

    const DenseMatrix d = s.densify();
    CHECK(d(0, 0) == 1.5);
    CHECK(d(2, 0) == -2.0);
    CHECK(d(1, 0) == 0.0);
    CHECK(d(3, 2) == 4.0);
    CHECK(d(0, 1) == 0.0);

    // row index out of range
    CHECK_THROWS_AS(SparseColMatrix::from_columns(2, {{{2, 1.0}}}), rankmap::Error);
    // rows within a column must strictly increase
    CHECK_THROWS_AS(SparseColMatrix::from_columns(3, {{{1, 1.0}, {1, 2.0}}}), rankmap::Error);
    CHECK_THROWS_AS(SparseColMatrix::from_columns(3, {{{2, 1.0}, {0, 2.0}}}), rankmap::Error);
    // stored zeros and non-finite values are rejected
    CHECK_THROWS_AS(SparseColMatrix::from_columns(3, {{{0, 0.0}}}), rankmap::Error);
    CHECK_THROWS_AS(SparseColMatrix::from_columns(3, {{{0, std::nan("")}}}), rankmap::Error);

    CHECK(s == SparseColMatrix::from_columns(4, {{{0, 1.5}, {2, -2.0}}, {}, {{3, 4.0}}}));
    CHECK(!(s == SparseColMatrix::from_columns(4, {{{0, 1.5}}, {}, {{3, 4.0}}})));
}

TEST_CASE("sparse matvec agrees with the densified reference") {
    rankmap::Rng rng(31);
    const std::size_t rows = 19, cols = 13;
    std::vector<std::vector<std::pair<std::size_t, double>>> colspec(cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i)
            if (rng.uniform01() < 0.3) colspec[j].emplace_back(i, rng.gaussian());
    const SparseColMatrix s = SparseColMatrix::from_columns(rows, colspec);
    const DenseMatrix d = s.densify();

    const Vector x = random_vec(cols, 41), xt = random_vec(rows, 42);

    const Vector y = sparse_matvec(s, x, false);
    const Vector ref = naive_matvec(d, x, false);
    for (std::size_t i = 0; i < rows; ++i)
        CHECK(y[i] == Catch::Approx(ref[i]).margin(1e-12 * (1.0 + std::abs(ref[i]))));

    // Transpose mode folds each column sequentially, so interleaved explicit
    // zeros in the reference change nothing.
    const Vector yt = sparse_matvec(s, xt, true);
    const Vector reft = naive_matvec(d, xt, true);
    for (std::size_t j = 0; j < cols; ++j) CHECK(yt[j] == reft[j]);

    CostContext ctx;
    sparse_matvec(s, x, false, ctx);
    CHECK(ctx.counters().multiplications == s.nnz());
    CHECK(ctx.counters().additions == s.nnz());
    ctx.reset();
    sparse_matvec(s, xt, true, ctx);
    CHECK(ctx.counters().multiplications == s.nnz());

    CHECK_THROWS_AS(sparse_matvec(s, xt, false), rankmap::DimensionError);
    CHECK_THROWS_AS(sparse_matvec(s, x, true), rankmap::DimensionError);
}

TEST_CASE("sparse matvec accumulates row scatters exactly") {
    // Three columns hit the same row with values a plain running sum cannot
    // survive; the row total must still come out exact.
    const SparseColMatrix s = SparseColMatrix::from_columns(
        2, {{{0, 1e100}}, {{0, 1.0}, {1, 2.0}}, {{0, -1e100}}});
    const Vector y = sparse_matvec(s, {1.0, 1.0, 1.0}, false);
    CHECK(y[0] == 1.0);
    CHECK(y[1] == 2.0);
}
