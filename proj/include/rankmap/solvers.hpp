#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rankmap/cost.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/exact_sum.hpp"
#include "rankmap/gram.hpp"
#include "rankmap/rng.hpp"

namespace rankmap {

inline double soft_threshold(double v, double tau) {
    if (v > tau) return v - tau;
    if (v < -tau) return v + tau;
    return 0.0;
}

// The solvers are written against an execution backend providing the operator
// application and the global reductions. Every reduction rounds exactly once,
// so any backend that partitions the index space produces bit-identical
// scalars, and therefore bit-identical iterates.
struct SerialExec {
    const GramOperator* g;

    std::size_t dim() const { return g->dim(); }

    Vector apply(const Vector& x, CostContext& ctx) const { return g->apply(x, ctx); }

    double dot(const Vector& a, const Vector& b, CostContext& ctx) const {
        ctx.count_mults(a.size());
        ctx.count_adds(a.size());
        return exact_dot(a.data(), b.data(), a.size());
    }

    double norm_sq(const Vector& v, CostContext& ctx) const {
        ctx.count_mults(v.size());
        ctx.count_adds(v.size());
        return exact_norm_sq(v);
    }

    double abs_sum(const Vector& v, CostContext& ctx) const {
        ctx.count_adds(v.size());
        ExactAccumulator acc;
        for (double x : v) acc.add(std::abs(x));
        return acc.round();
    }

    // Centrally generated vectors need no distribution here.
    void scatter_cost(CostContext&) const {}
};

// ---------------------------------------------------------------------------
// Power iteration
// ---------------------------------------------------------------------------

struct PowerConfig {
    std::size_t count = 1;         // leading eigenpairs to extract
    std::size_t max_iters = 1000;  // per eigenpair
    double tol = 1e-10;            // residual tolerance relative to the eigenvalue
    std::uint64_t seed = 0;
};

struct PowerResult {
    Vector values;                        // descending
    std::vector<Vector> vectors;          // unit length, mutually orthogonal
    std::vector<std::size_t> iterations;  // per returned pair, pre-sort order
};

namespace detail {

// Two rounds of Gram-Schmidt against the accepted vectors; one round leaves
// O(eps·kappa) leakage that deflation cannot tolerate.
template <typename Exec>
void deflate(const Exec& exec, Vector& v, const std::vector<Vector>& basis, CostContext& ctx) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const Vector& q : basis) {
            const double c = exec.dot(q, v, ctx);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
            ctx.count_mults(v.size());
            ctx.count_adds(v.size());
        }
    }
}

template <typename Exec>
bool normalize(const Exec& exec, Vector& v, CostContext& ctx) {
    const double nsq = exec.norm_sq(v, ctx);
    if (nsq == 0.0) return false;
    const double inv = 1.0 / std::sqrt(nsq);
    for (double& x : v) x *= inv;
    ctx.count_mults(v.size());
    return true;
}

}  // namespace detail

// Leading eigenpairs of the (symmetric positive semidefinite) operator by
// deflated power iteration. Residual convergence: |G v - sigma v| <=
// tol·sigma + 1e-14·scale + (sum of residuals of the accepted pairs). The
// last term is the deflation floor: pair k sees leakage through every
// earlier approximate eigenvector of exactly that size, so demanding less
// would stall forever. Throws EigenConvergenceError carrying the converged
// prefix when an eigenpair stalls past max_iters anyway.
template <typename Exec>
PowerResult power_eigs_exec(const Exec& exec, const PowerConfig& cfg, CostContext& ctx) {
    const std::size_t n = exec.dim();
    if (cfg.count == 0 || cfg.count > n)
        throw InvalidArgumentError("power_eigs: count must lie in [1, dim]");
    if (cfg.tol < 0.0) throw InvalidArgumentError("power_eigs: tol must be non-negative");

    Rng rng(cfg.seed);
    PowerResult out;
    double scale = 0.0;
    double defl_floor = 0.0;

    for (std::size_t k = 0; k < cfg.count; ++k) {
        Vector v(n);
        do {
            for (double& x : v) x = rng.gaussian();
            exec.scatter_cost(ctx);
            detail::deflate(exec, v, out.vectors, ctx);
        } while (!detail::normalize(exec, v, ctx));

        bool converged = false;
        std::size_t iter = 0;
        double sigma = 0.0;
        double achieved = 0.0;
        while (iter < cfg.max_iters) {
            ++iter;
            Vector gv = exec.apply(v, ctx);
            sigma = exec.dot(v, gv, ctx);
            scale = std::max(scale, std::abs(sigma));

            Vector r(n);
            for (std::size_t i = 0; i < n; ++i) r[i] = gv[i] - sigma * v[i];
            ctx.count_mults(n);
            ctx.count_adds(n);
            const double rnorm = std::sqrt(exec.norm_sq(r, ctx));
            if (rnorm <= cfg.tol * std::abs(sigma) + 1e-14 * scale + defl_floor) {
                converged = true;
                achieved = rnorm;
                break;
            }

            detail::deflate(exec, gv, out.vectors, ctx);
            if (!detail::normalize(exec, gv, ctx)) {
                // The operator maps v into the deflated span: restart this
                // pair from a fresh direction.
                do {
                    for (double& x : gv) x = rng.gaussian();
                    exec.scatter_cost(ctx);
                    detail::deflate(exec, gv, out.vectors, ctx);
                } while (!detail::normalize(exec, gv, ctx));
            }
            v = std::move(gv);
        }

        if (!converged)
            throw EigenConvergenceError("power_eigs: eigenpair " + std::to_string(k) +
                                            " did not converge",
                                        out.values, out.vectors);
        defl_floor += achieved;
        out.values.push_back(sigma);
        out.vectors.push_back(std::move(v));
        out.iterations.push_back(iter);
    }

    // Deflated extraction usually emerges ordered already; enforce it.
    std::vector<std::size_t> order(out.values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out.values[a] > out.values[b]; });
    PowerResult sorted;
    for (std::size_t i : order) {
        sorted.values.push_back(out.values[i]);
        sorted.vectors.push_back(std::move(out.vectors[i]));
        sorted.iterations.push_back(out.iterations[i]);
    }
    return sorted;
}

inline PowerResult power_eigs(const GramOperator& g, const PowerConfig& cfg, CostContext& ctx) {
    const SerialExec exec{&g};
    return power_eigs_exec(exec, cfg, ctx);
}

// Cheap spectral-norm estimate: fixed-count power iterations, no deflation,
// returning the last Rayleigh quotient (0 for the zero operator).
template <typename Exec>
double power_estimate_exec(const Exec& exec, std::size_t iters, std::uint64_t seed,
                           CostContext& ctx) {
    const std::size_t n = exec.dim();
    Rng rng(seed);
    Vector v(n);
    do {
        for (double& x : v) x = rng.gaussian();
        exec.scatter_cost(ctx);
    } while (!detail::normalize(exec, v, ctx));

    double sigma = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        Vector gv = exec.apply(v, ctx);
        sigma = exec.dot(v, gv, ctx);
        if (!detail::normalize(exec, gv, ctx)) return 0.0;
        v = std::move(gv);
    }
    return sigma;
}

inline double power_estimate_l(const GramOperator& g, std::size_t iters, std::uint64_t seed,
                               CostContext& ctx) {
    const SerialExec exec{&g};
    return power_estimate_exec(exec, iters, seed, ctx);
}

// ---------------------------------------------------------------------------
// Iterative soft-thresholding (plain and accelerated)
// ---------------------------------------------------------------------------

struct IstConfig {
    double lambda = 0.1;      // l1 weight
    double gamma = 0.0;       // step size; 0 derives one from a spectral estimate
    std::size_t max_iters = 500;
    double tol = 1e-8;        // relative iterate change; 0 runs all iterations
    bool accelerate = true;   // momentum on an auxiliary sequence
    bool track_objective = true;
    // When the data norm |y|² is supplied, the trace reports the true
    // objective ½|Ax-y|² + λ|x|₁; otherwise it omits the constant ½|y|².
    double y_norm_sq = -1.0;
    std::uint64_t seed = 0;   // only for the spectral estimate
    // Alternative stopping rule, checked after each accepted iterate in
    // addition to tol (either may stop the solve). The callback receives the
    // iterate and the 1-based iteration count; any work it does is not billed
    // to the solve's cost context.
    std::function<bool(const Vector&, std::size_t)> stop_check;
};

struct IstResult {
    Vector x;
    std::size_t iterations = 0;
    bool converged = false;
    double gamma = 0.0;          // step size actually used
    Vector objective_trace;      // F at each iteration's operator-apply point
};

// Minimizes ½ xᵀG x - bᵀx + λ|x|₁ from x = 0. With momentum the operator is
// applied at the auxiliary point, so the trace logs the objective there; the
// plain mode applies it at the iterate itself and its trace is monotone.
// Iterate blow-up raises DivergenceError carrying the step size.
template <typename Exec>
IstResult ist_solve_exec(const Exec& exec, const Vector& b, const IstConfig& cfg,
                         CostContext& ctx) {
    const std::size_t n = exec.dim();
    if (b.size() != n) throw DimensionError("ist_solve: b length must equal operator dim");
    if (cfg.lambda < 0.0) throw InvalidArgumentError("ist_solve: lambda must be non-negative");
    if (cfg.gamma < 0.0) throw InvalidArgumentError("ist_solve: gamma must be non-negative");
    if (cfg.tol < 0.0) throw InvalidArgumentError("ist_solve: tol must be non-negative");

    double gamma = cfg.gamma;
    if (gamma == 0.0) {
        const double lmax = power_estimate_exec(exec, 50, cfg.seed, ctx);
        if (!(lmax > 0.0))
            throw DegenerateInputError(
                "ist_solve: spectral estimate is zero; supply gamma explicitly");
        gamma = 1.0 / (1.02 * lmax);  // margin keeps gamma·L <= 1 despite the estimate lag
    }
    const double tau = gamma * cfg.lambda;
    const double offset = cfg.y_norm_sq >= 0.0 ? 0.5 * cfg.y_norm_sq : 0.0;

    IstResult res;
    res.gamma = gamma;
    Vector x(n, 0.0);
    Vector z(n, 0.0);
    double t = 1.0;

    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        const Vector gz = exec.apply(z, ctx);

        if (cfg.track_objective) {
            const double quad = 0.5 * exec.dot(z, gz, ctx);
            const double lin = exec.dot(b, z, ctx);
            const double l1 = exec.abs_sum(z, ctx);
            res.objective_trace.push_back(quad - lin + cfg.lambda * l1 + offset);
        }

        Vector xn(n);
        bool bad = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double step = z[i] - gamma * (gz[i] - b[i]);
            const double v = soft_threshold(step, tau);
            xn[i] = v;
            // Entrywise guard instead of a norm so divergence detection costs
            // no extra global reduction.
            if (!std::isfinite(v) || std::abs(v) > 1e150) bad = true;
        }
        ctx.count_mults(2 * n);
        ctx.count_adds(3 * n);
        if (bad) throw DivergenceError("ist_solve: iterates diverged", gamma, iter + 1);

        res.iterations = iter + 1;

        bool stop = false;
        if (cfg.tol > 0.0) {
            Vector dx(n);
            for (std::size_t i = 0; i < n; ++i) dx[i] = xn[i] - x[i];
            ctx.count_adds(n);
            const double dsq = exec.norm_sq(dx, ctx);
            const double nsq = exec.norm_sq(xn, ctx);
            stop = std::sqrt(dsq) <= cfg.tol * std::sqrt(nsq);
        }
        if (!stop && cfg.stop_check) stop = cfg.stop_check(xn, iter + 1);

        if (cfg.accelerate) {
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double mu = (t - 1.0) / tn;
            for (std::size_t i = 0; i < n; ++i) z[i] = xn[i] + mu * (xn[i] - x[i]);
            ctx.count_mults(n);
            ctx.count_adds(2 * n);
            t = tn;
        } else {
            z = xn;
        }
        x = std::move(xn);

        if (stop) {
            res.converged = true;
            break;
        }
    }

    res.x = std::move(x);
    return res;
}

inline IstResult ist_solve(const GramOperator& g, const Vector& b, const IstConfig& cfg,
                           CostContext& ctx) {
    const SerialExec exec{&g};
    return ist_solve_exec(exec, b, cfg, ctx);
}

}  // namespace rankmap
