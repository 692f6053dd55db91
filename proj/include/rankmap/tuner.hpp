#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rankmap/cost.hpp"
#include "rankmap/cssd.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/gram.hpp"
#include "rankmap/metrics.hpp"
#include "rankmap/parallel.hpp"
#include "rankmap/rng.hpp"
#include "rankmap/solvers.hpp"

namespace rankmap {

// Searches for the loosest factorization tolerance delta_d whose downstream
// solver error delta_l still meets a user target, by halving delta_d from
// delta_d_max until the target holds or the floor is crossed.
struct TuneConfig {
    double delta_d_max = 0.4;
    double delta_d_min = 1e-3;
    double target_delta_l = 0.0;  // required; +inf accepts the first round
    std::size_t max_rounds = 32;
    // Evaluate every ladder value concurrently instead of stopping at the
    // first pass. Requires a thread-safe `evaluate`; rounds no longer share
    // one growing selection, so each round decomposes from scratch.
    bool parallel = false;
    CssdConfig decompose;  // delta_d is overwritten per round
    std::function<double(const Factorization&)> evaluate;
};

struct TuneRound {
    double delta_d = 0.0;
    double delta_l = 0.0;
    std::size_t selected = 0;
    std::uint64_t nnz = 0;
};

struct TuneResult {
    double delta_d = 0.0;
    Factorization factorization;
    std::vector<TuneRound> trace;
};

namespace detail {

inline std::vector<double> halving_ladder(const TuneConfig& cfg) {
    std::vector<double> ladder;
    for (double dd = cfg.delta_d_max; dd >= cfg.delta_d_min && ladder.size() < cfg.max_rounds;
         dd /= 2.0)
        ladder.push_back(dd);
    return ladder;
}

inline void validate_tune(const TuneConfig& cfg) {
    if (!(cfg.delta_d_min > 0.0) || !(cfg.delta_d_min < cfg.delta_d_max) ||
        !(cfg.delta_d_max < 1.0))
        throw InvalidArgumentError("tune: need 0 < delta_d_min < delta_d_max < 1");
    if (!(cfg.target_delta_l > 0.0))
        throw InvalidArgumentError("tune: target_delta_l must be positive");
    if (cfg.max_rounds == 0) throw InvalidArgumentError("tune: max_rounds must be positive");
    if (!cfg.evaluate) throw InvalidArgumentError("tune: evaluation closure missing");
}

}  // namespace detail

inline TuneResult tune(const DenseMatrix& a, const TuneConfig& cfg, CostContext& ctx) {
    detail::validate_tune(cfg);
    const std::vector<double> ladder = detail::halving_ladder(cfg);

    TuneResult out;
    double best_dd = std::numeric_limits<double>::quiet_NaN();
    double best_dl = std::numeric_limits<double>::infinity();

    if (cfg.parallel) {
        std::vector<Factorization> facts(ladder.size());
        std::vector<double> dls(ladder.size());
        std::vector<CostContext> local(ladder.size());
        parallel_ranges(ladder.size(), ladder.size(),
                        [&](std::size_t begin, std::size_t end, std::size_t) {
                            for (std::size_t k = begin; k < end; ++k) {
                                CssdConfig c = cfg.decompose;
                                c.delta_d = ladder[k];
                                facts[k] = decompose(a, c, local[k]);
                                dls[k] = cfg.evaluate(facts[k]);
                            }
                        });
        for (const auto& c : local) ctx.merge(c);
        for (std::size_t k = 0; k < ladder.size(); ++k)
            out.trace.push_back({ladder[k], dls[k], facts[k].selected.size(), facts[k].nnz()});
        for (std::size_t k = 0; k < ladder.size(); ++k) {
            if (dls[k] <= cfg.target_delta_l) {
                out.delta_d = ladder[k];
                out.factorization = std::move(facts[k]);
                return out;
            }
            if (dls[k] < best_dl) {
                best_dl = dls[k];
                best_dd = ladder[k];
            }
        }
    } else {
        SelectionState state(cfg.decompose.seed);
        for (double dd : ladder) {
            CssdConfig c = cfg.decompose;
            c.delta_d = dd;
            Factorization f = decompose_resume(a, c, state, ctx);
            const double dl = cfg.evaluate(f);
            out.trace.push_back({dd, dl, f.selected.size(), f.nnz()});
            if (dl <= cfg.target_delta_l) {
                out.delta_d = dd;
                out.factorization = std::move(f);
                return out;
            }
            if (dl < best_dl) {
                best_dl = dl;
                best_dd = dd;
            }
        }
    }
    throw UnreachableTargetError("tune: target delta_l unreachable above the delta_d floor",
                                 best_dd, best_dl);
}

// Evaluation closure comparing leading eigenvalues of the factored operator
// against the unfactored reference, computed once up front. `a` must outlive
// the closure. Thread-safe: each call works on locals only.
inline std::function<double(const Factorization&)> make_power_eval(const DenseMatrix& a,
                                                                   std::size_t count,
                                                                   const PowerConfig& base,
                                                                   CostContext& ctx) {
    const GramOperator full = GramOperator::full(a);
    PowerConfig cfg = base;
    cfg.count = count;
    auto reference = std::make_shared<Vector>(power_eigs(full, cfg, ctx).values);
    return [reference, cfg](const Factorization& f) {
        const GramOperator g = GramOperator::factored(f.d, f.v);
        CostContext local;
        const PowerResult r = power_eigs(g, cfg, local);
        return learning_error(*reference, r.values);
    };
}

// Evaluation closure comparing sparse-regression solutions on a fixed batch
// of held-out probe signals. The error is the relative l2 distance over the
// stacked probe solutions, so one number covers the whole batch. Probes run
// concurrently across `workers`. `a` must outlive the closure.
inline std::function<double(const Factorization&)> make_fista_eval(
    const DenseMatrix& a, std::size_t probes, const IstConfig& base, std::uint64_t seed,
    std::size_t workers, CostContext& ctx) {
    if (probes == 0) throw InvalidArgumentError("make_fista_eval: need at least one probe");
    const std::size_t m = a.rows();
    auto ys = std::make_shared<std::vector<Vector>>(probes, Vector(m));
    Rng rng(seed);
    for (auto& y : *ys)
        for (double& e : y) e = rng.gaussian();

    const GramOperator full = GramOperator::full(a);
    auto refs = std::make_shared<std::vector<Vector>>(probes);
    {
        std::vector<CostContext> local(workers == 0 ? 1 : workers);
        parallel_ranges(probes, workers, [&](std::size_t begin, std::size_t end, std::size_t s) {
            for (std::size_t p = begin; p < end; ++p) {
                const Vector b = full.correlate((*ys)[p], local[s]);
                (*refs)[p] = ist_solve(full, b, base, local[s]).x;
            }
        });
        for (const auto& c : local) ctx.merge(c);
    }

    const IstConfig cfg = base;
    const std::size_t nw = workers == 0 ? 1 : workers;
    return [ys, refs, cfg, nw](const Factorization& f) {
        const GramOperator g = GramOperator::factored(f.d, f.v);
        const std::size_t probes = ys->size();
        std::vector<double> dsq(probes), rsq(probes);
        parallel_ranges(probes, nw, [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t p = begin; p < end; ++p) {
                CostContext local;
                const Vector b = g.correlate((*ys)[p], local);
                const Vector x = ist_solve(g, b, cfg, local).x;
                const Vector& r = (*refs)[p];
                double d2 = 0.0, r2 = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double d = r[i] - x[i];
                    d2 += d * d;
                    r2 += r[i] * r[i];
                }
                dsq[p] = d2;
                rsq[p] = r2;
            }
        });
        double d2 = 0.0, r2 = 0.0;
        for (std::size_t p = 0; p < probes; ++p) {
            d2 += dsq[p];
            r2 += rsq[p];
        }
        if (r2 == 0.0) throw DegenerateInputError("fista eval: all reference solutions are zero");
        return std::sqrt(d2) / std::sqrt(r2);
    };
}

}  // namespace rankmap
