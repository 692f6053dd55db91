#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rankmap/cssd.hpp"
#include "rankmap/gram.hpp"
#include "rankmap/rng.hpp"
#include "rankmap/solvers.hpp"

using rankmap::CostContext;
using rankmap::DenseMatrix;
using rankmap::GramOperator;
using rankmap::IstConfig;
using rankmap::PowerConfig;
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

// G = AᵀA in plain nested loops.
std::vector<Vector> explicit_gram(const DenseMatrix& a) {
    const std::size_t n = a.cols();
    std::vector<Vector> g(n, Vector(n, 0.0));
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
            double acc = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, p) * a(i, q);
            g[p][q] = acc;
        }
    return g;
}

// Independent eigenvalue reference: cyclic Jacobi rotations on a dense
// symmetric matrix until the off-diagonal mass is gone.
Vector jacobi_eigenvalues(std::vector<Vector> s) {
    const std::size_t n = s.size();
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            diag += s[p][p] * s[p][p];
            for (std::size_t q = p + 1; q < n; ++q) off += s[p][q] * s[p][q];
        }
        if (off <= 1e-30 * (diag + off)) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (s[p][q] == 0.0) continue;
                const double theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = s[k][p], skq = s[k][q];
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = s[p][k], sqk = s[q][k];
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
        }
    }
    Vector ev(n);
    for (std::size_t p = 0; p < n; ++p) ev[p] = s[p][p];
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

// Independent solver reference: plain proximal gradient on the explicit
// matrix, nothing shared with the library implementation.
Vector prox_grad_reference(const DenseMatrix& a, const Vector& y, double lambda, double gamma,
                           std::size_t iters) {
    const std::size_t m = a.rows(), n = a.cols();
    Vector x(n, 0.0);
    for (std::size_t it = 0; it < iters; ++it) {
        Vector r(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * x[j];
            r[i] = acc - y[i];
        }
        for (std::size_t j = 0; j < n; ++j) {
            double grad = 0.0;
            for (std::size_t i = 0; i < m; ++i) grad += a(i, j) * r[i];
            const double step = x[j] - gamma * grad;
            const double tau = gamma * lambda;
            x[j] = step > tau ? step - tau : (step < -tau ? step + tau : 0.0);
        }
    }
    return x;
}

DenseMatrix orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    DenseMatrix m = random_dense(rows, cols, seed);
    for (std::size_t j = 0; j < cols; ++j) {
        double* cj = m.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                const double* ck = m.col(k);
                double c = 0.0;
                for (std::size_t i = 0; i < rows; ++i) c += ck[i] * cj[i];
                for (std::size_t i = 0; i < rows; ++i) cj[i] -= c * ck[i];
            }
        }
        double nn = 0.0;
        for (std::size_t i = 0; i < rows; ++i) nn += cj[i] * cj[i];
        nn = std::sqrt(nn);
        for (std::size_t i = 0; i < rows; ++i) cj[i] /= nn;
    }
    return m;
}

}  // namespace

TEST_CASE("gram operator multiplication counts are exact") {
    const DenseMatrix a = random_dense(14, 9, 1);
    const GramOperator gf = GramOperator::full(a);
    const Vector x = random_vec(9, 2);

    CostContext ctx;
    gf.apply(x, ctx);
    CHECK(ctx.counters().multiplications == 2 * 14 * 9);
    CHECK(ctx.counters().additions == 2 * 14 * 9);

    rankmap::CssdConfig cfg;
    cfg.delta_d = 0.0;
    cfg.seed = 3;
    const rankmap::Factorization f = rankmap::decompose(random_dense(10, 30, 5), cfg);
    const GramOperator gg = GramOperator::factored(f.d, f.v);
    ctx.reset();
    gg.apply(random_vec(30, 6), ctx);
    const std::uint64_t expected = 2 * (f.v.nnz() + f.d.cols() * 10);
    CHECK(ctx.counters().multiplications == expected);
}

TEST_CASE("full and factored operators agree on an exact factorization") {
    const DenseMatrix b = random_dense(12, 5, 11);
    const DenseMatrix c = random_dense(5, 40, 12);
    CostContext ctx;
    const DenseMatrix a = dense_matmul(b, c, ctx);

    rankmap::CssdConfig cfg;
    cfg.delta_d = 0.0;
    cfg.batch_size = 1;
    cfg.seed = 9;
    const rankmap::Factorization f = rankmap::decompose(a, cfg);
    REQUIRE(f.success());

    const GramOperator full = GramOperator::full(a);
    const GramOperator fact = GramOperator::factored(f.d, f.v);
    const GramOperator cached = GramOperator::factored_cached(f.d, f.v, ctx);

    rankmap::Rng rng(13);
    for (int probe = 0; probe < 25; ++probe) {
        Vector x(40);
        for (double& v : x) v = rng.gaussian();
        const Vector zf = full.apply(x, ctx);
        const Vector zg = fact.apply(x, ctx);
        const Vector zc = cached.apply(x, ctx);
        double scale = 0.0;
        for (double v : zf) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < 40; ++i) {
            CHECK(std::abs(zf[i] - zg[i]) <= 1e-9 * scale);
            CHECK(std::abs(zg[i] - zc[i]) <= 1e-9 * scale);
        }
    }

    // correlate and reconstruct agree across representations too
    const Vector y = random_vec(12, 14);
    const Vector bf = full.correlate(y, ctx);
    const Vector bg = fact.correlate(y, ctx);
    for (std::size_t i = 0; i < 40; ++i) CHECK(bf[i] == Catch::Approx(bg[i]).margin(1e-9));
    const Vector xs = random_vec(40, 15);
    const Vector rf = full.reconstruct(xs, ctx);
    const Vector rg = fact.reconstruct(xs, ctx);
    for (std::size_t i = 0; i < 12; ++i) CHECK(rf[i] == Catch::Approx(rg[i]).margin(1e-9));
}

TEST_CASE("power iteration matches the Jacobi reference") {
    const DenseMatrix a = random_dense(15, 8, 21);
    const Vector ref = jacobi_eigenvalues(explicit_gram(a));

    const GramOperator g = GramOperator::full(a);
    PowerConfig cfg;
    cfg.count = 4;
    cfg.tol = 1e-12;
    cfg.max_iters = 50000;
    cfg.seed = 22;
    CostContext ctx;
    const rankmap::PowerResult r = power_eigs(g, cfg, ctx);

    REQUIRE(r.values.size() == 4);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(r.values[k] == Catch::Approx(ref[k]).epsilon(1e-8));
    for (std::size_t k = 1; k < 4; ++k) CHECK(r.values[k] <= r.values[k - 1]);
}

TEST_CASE("eigenpairs satisfy the residual invariant and are orthonormal") {
    const DenseMatrix a = random_dense(20, 10, 31);
    const GramOperator g = GramOperator::full(a);
    PowerConfig cfg;
    cfg.count = 5;
    cfg.tol = 1e-10;
    cfg.max_iters = 50000;
    cfg.seed = 32;
    CostContext ctx;
    const rankmap::PowerResult r = power_eigs(g, cfg, ctx);

    for (std::size_t k = 0; k < 5; ++k) {
        const Vector gv = g.apply(r.vectors[k], ctx);
        double rn = 0.0;
        for (std::size_t i = 0; i < 10; ++i) {
            const double d = gv[i] - r.values[k] * r.vectors[k][i];
            rn += d * d;
        }
        CHECK(std::sqrt(rn) <= 1e-6 * r.values[k]);
        for (std::size_t j = 0; j <= k; ++j) {
            double dot = 0.0;
            for (std::size_t i = 0; i < 10; ++i) dot += r.vectors[k][i] * r.vectors[j][i];
            CHECK(std::abs(dot - (j == k ? 1.0 : 0.0)) < 1e-8);
        }
    }
}

TEST_CASE("power iteration on factored and full operators agrees") {
    const DenseMatrix b = random_dense(16, 6, 41);
    const DenseMatrix c = random_dense(6, 50, 42);
    CostContext ctx;
    const DenseMatrix a = dense_matmul(b, c, ctx);
    rankmap::CssdConfig dcfg;
    dcfg.delta_d = 0.0;
    dcfg.batch_size = 1;
    dcfg.seed = 43;
    const rankmap::Factorization f = rankmap::decompose(a, dcfg);
    REQUIRE(f.success());

    PowerConfig cfg;
    cfg.count = 5;
    cfg.tol = 1e-11;
    cfg.max_iters = 100000;
    cfg.seed = 44;
    const rankmap::PowerResult rf = power_eigs(GramOperator::full(a), cfg, ctx);
    const rankmap::PowerResult rg = power_eigs(GramOperator::factored(f.d, f.v), cfg, ctx);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(rf.values[k] == Catch::Approx(rg.values[k]).epsilon(1e-6));
}

TEST_CASE("power iteration is deterministic") {
    const DenseMatrix a = random_dense(12, 7, 51);
    const GramOperator g = GramOperator::full(a);
    PowerConfig cfg;
    cfg.count = 3;
    cfg.seed = 52;
    cfg.max_iters = 50000;
    CostContext ctx;
    const rankmap::PowerResult r1 = power_eigs(g, cfg, ctx);
    const rankmap::PowerResult r2 = power_eigs(g, cfg, ctx);
    CHECK(r1.values == r2.values);
    for (std::size_t k = 0; k < 3; ++k) CHECK(r1.vectors[k] == r2.vectors[k]);
}

TEST_CASE("stalled eigenpairs raise with the converged prefix") {
    // Two nearly equal leading eigenvalues converge; asking for machine
    // precision in three iterations cannot.
    DenseMatrix a(3, 3, Vector(9, 0.0));
    a(0, 0) = 1.0;
    a(1, 1) = 0.9995;
    a(2, 2) = 0.4;
    const GramOperator g = GramOperator::full(a);
    PowerConfig cfg;
    cfg.count = 2;
    cfg.tol = 1e-13;
    cfg.max_iters = 3;
    cfg.seed = 61;
    CostContext ctx;
    try {
        power_eigs(g, cfg, ctx);
        FAIL("expected EigenConvergenceError");
    } catch (const rankmap::EigenConvergenceError& e) {
        CHECK(e.converged_values.size() < 2);
        CHECK(e.converged_values.size() == e.converged_vectors.size());
    }
}

TEST_CASE("zero operator yields zero eigenvalues") {
    const DenseMatrix a(5, 4, Vector(20, 0.0));
    const GramOperator g = GramOperator::full(a);
    PowerConfig cfg;
    cfg.count = 2;
    cfg.seed = 71;
    CostContext ctx;
    const rankmap::PowerResult r = power_eigs(g, cfg, ctx);
    CHECK(r.values[0] == 0.0);
    CHECK(r.values[1] == 0.0);
}

TEST_CASE("spectral estimate approaches the top eigenvalue") {
    const DenseMatrix a = random_dense(18, 9, 81);
    const Vector ref = jacobi_eigenvalues(explicit_gram(a));
    CostContext ctx;
    const double est = rankmap::power_estimate_l(GramOperator::full(a), 50, 82, ctx);
    CHECK(est == Catch::Approx(ref[0]).epsilon(0.01));
    CHECK(est <= ref[0] * (1.0 + 1e-9));  // Rayleigh quotients never exceed the top
}

TEST_CASE("accelerated solver reaches the reference minimizer") {
    const std::size_t m = 20, n = 12;
    const DenseMatrix a = random_dense(m, n, 91);
    const Vector y = random_vec(m, 92);
    const double lambda = 0.1;
    // Step size from the independent eigenvalue route.
    const double gamma = 1.0 / (1.05 * jacobi_eigenvalues(explicit_gram(a))[0]);

    const Vector ref = prox_grad_reference(a, y, lambda, gamma, 100000);

    const GramOperator g = GramOperator::full(a);
    CostContext ctx;
    const Vector b = g.correlate(y, ctx);
    IstConfig cfg;
    cfg.lambda = lambda;
    cfg.gamma = gamma;
    cfg.max_iters = 5000;
    cfg.tol = 0.0;
    const rankmap::IstResult r = ist_solve(g, b, cfg, ctx);

    double refn = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        refn += ref[i] * ref[i];
        diff += (r.x[i] - ref[i]) * (r.x[i] - ref[i]);
    }
    CHECK(std::sqrt(diff) <= 1e-6 * std::max(1.0, std::sqrt(refn)));
}

TEST_CASE("plain mode objective decreases monotonically") {
    const DenseMatrix a = random_dense(15, 10, 101);
    const Vector y = random_vec(15, 102);
    const GramOperator g = GramOperator::full(a);
    CostContext ctx;
    const Vector b = g.correlate(y, ctx);
    double ysq = 0.0;
    for (double v : y) ysq += v * v;

    IstConfig cfg;
    cfg.lambda = 0.2;
    cfg.accelerate = false;
    cfg.max_iters = 300;
    cfg.tol = 0.0;
    cfg.y_norm_sq = ysq;
    const rankmap::IstResult r = ist_solve(g, b, cfg, ctx);
    REQUIRE(r.objective_trace.size() == 300);
    CHECK(r.objective_trace[0] == 0.5 * ysq);  // starts at x = 0
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
        CHECK(r.objective_trace[k] <= r.objective_trace[k - 1] + 1e-12);
    CHECK(r.objective_trace.back() >= 0.0);  // true objective is non-negative
}

TEST_CASE("orthonormal columns with no penalty recover the correlation") {
    const DenseMatrix a = orthonormal(16, 6, 111);
    const Vector y = random_vec(16, 112);
    const GramOperator g = GramOperator::full(a);
    CostContext ctx;
    const Vector b = g.correlate(y, ctx);

    IstConfig cfg;
    cfg.lambda = 0.0;
    cfg.gamma = 0.9;
    cfg.max_iters = 500;
    cfg.tol = 0.0;
    const rankmap::IstResult r = ist_solve(g, b, cfg, ctx);
    for (std::size_t i = 0; i < 6; ++i) CHECK(r.x[i] == Catch::Approx(b[i]).margin(1e-10));
}

TEST_CASE("convergence is flagged and iteration-bounded") {
    const DenseMatrix a = random_dense(18, 8, 121);
    const Vector y = random_vec(18, 122);
    const GramOperator g = GramOperator::full(a);
    CostContext ctx;
    const Vector b = g.correlate(y, ctx);

    IstConfig cfg;
    cfg.lambda = 0.5;
    cfg.tol = 1e-10;
    cfg.max_iters = 100000;
    cfg.seed = 123;
    const rankmap::IstResult r = ist_solve(g, b, cfg, ctx);
    CHECK(r.converged);
    CHECK(r.iterations < cfg.max_iters);
    CHECK(r.gamma > 0.0);  // derived automatically

    const rankmap::IstResult r2 = ist_solve(g, b, cfg, ctx);
    CHECK(r.x == r2.x);  // bitwise repeatable
}

TEST_CASE("oversized steps raise a divergence error with context") {
    const DenseMatrix a = random_dense(10, 6, 131);
    const Vector y = random_vec(10, 132);
    const GramOperator g = GramOperator::full(a);
    CostContext ctx;
    const Vector b = g.correlate(y, ctx);

    IstConfig cfg;
    cfg.lambda = 0.1;
    cfg.gamma = 1e6;
    cfg.max_iters = 5000;
    cfg.tol = 0.0;
    try {
        ist_solve(g, b, cfg, ctx);
        FAIL("expected DivergenceError");
    } catch (const rankmap::DivergenceError& e) {
        CHECK(e.step_size == 1e6);
        CHECK(e.iteration >= 1);
    }
}

TEST_CASE("zero operator cannot derive a step size") {
    const DenseMatrix a(6, 4, Vector(24, 0.0));
    const GramOperator g = GramOperator::full(a);
    CostContext ctx;
    IstConfig cfg;
    CHECK_THROWS_AS(ist_solve(g, Vector(4, 0.0), cfg, ctx), rankmap::DegenerateInputError);
}

TEST_CASE("solver input validation") {
    const DenseMatrix a = random_dense(6, 4, 141);
    const GramOperator g = GramOperator::full(a);
    CostContext ctx;
    IstConfig cfg;
    CHECK_THROWS_AS(ist_solve(g, Vector(3, 0.0), cfg, ctx), rankmap::DimensionError);
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(ist_solve(g, Vector(4, 0.0), cfg, ctx), rankmap::InvalidArgumentError);

    PowerConfig pcfg;
    pcfg.count = 0;
    CHECK_THROWS_AS(power_eigs(g, pcfg, ctx), rankmap::InvalidArgumentError);
    pcfg.count = 5;
    CHECK_THROWS_AS(power_eigs(g, pcfg, ctx), rankmap::InvalidArgumentError);
}
