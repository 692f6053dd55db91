#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rankmap/cost.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/exact_sum.hpp"
#include "rankmap/parallel.hpp"
#include "rankmap/solvers.hpp"
#include "rankmap/sparse_matrix.hpp"

namespace rankmap {

// How the factorization is laid out across workers, which determines what
// gets counted as communication and memory:
//   matrix - workers hold contiguous column chunks of V and exchange dense
//            length-l row vectors with the central node each iteration.
//   graph  - same dataflow, but messages carry only the rows a worker's
//            columns actually touch, with one replica of every row co-located
//            with its master copy and therefore free.
//   full   - no factorization; the unfactored operator runs on one node.
enum class ExecModel { matrix, graph, full };

inline const char* to_string(ExecModel m) {
    switch (m) {
        case ExecModel::matrix: return "matrix";
        case ExecModel::graph: return "graph";
        default: return "full";
    }
}

// Workers either run as a plain ordered loop or as one thread per worker with
// a join before every merge. Results and counters are identical: the split is
// static, outputs are disjoint, and accounting merges in worker order.
enum class Scheduler { sequential, threads };

struct DistConfig {
    ExecModel model = ExecModel::matrix;
    std::size_t n_workers = 1;
    Scheduler scheduler = Scheduler::sequential;
};

// Contiguous balanced chunks of [0, total): the first (total % workers)
// chunks take one extra element.
struct WorkerPartition {
    std::vector<std::size_t> bounds;  // workers + 1 entries

    std::size_t workers() const { return bounds.size() - 1; }
    std::size_t begin(std::size_t w) const { return bounds[w]; }
    std::size_t end(std::size_t w) const { return bounds[w + 1]; }
    std::size_t size(std::size_t w) const { return bounds[w + 1] - bounds[w]; }
};

inline WorkerPartition make_partition(std::size_t total, std::size_t workers) {
    if (workers == 0) throw InvalidArgumentError("make_partition: need at least one worker");
    WorkerPartition p;
    p.bounds.assign(1, 0);
    const std::size_t base = total / workers, rem = total % workers;
    for (std::size_t w = 0; w < workers; ++w)
        p.bounds.push_back(p.bounds.back() + base + (w < rem ? 1 : 0));
    return p;
}

// Replica count per row of V: the number of distinct workers whose columns
// hold at least one entry of that row, and at least 1 (every row has a master
// copy somewhere even if no column references it).
inline std::vector<std::size_t> replication_counts(const SparseColMatrix& v,
                                                   const WorkerPartition& p) {
    std::vector<std::size_t> rep(v.rows(), 0);
    const auto& cp = v.col_ptr();
    const auto& ri = v.row_idx();
    for (std::size_t w = 0; w < p.workers(); ++w) {
        std::vector<char> seen(v.rows(), 0);
        for (std::size_t j = p.begin(w); j < p.end(w); ++j)
            for (std::size_t t = cp[j]; t < cp[j + 1]; ++t) seen[ri[t]] = 1;
        for (std::size_t i = 0; i < v.rows(); ++i) rep[i] += seen[i];
    }
    for (std::size_t i = 0; i < v.rows(); ++i) rep[i] = std::max<std::size_t>(rep[i], 1);
    return rep;
}

// Distributed execution backend over a factorization A ~= D V. The column
// space of V (and every solver vector) is partitioned across workers; the
// dictionary lives on the central node (worker 0). One operator application
// is the four-step flow
//   1. workers accumulate their columns' contribution to w = V x
//   2. partial accumulators gather at the central node
//   3. the central node computes t = Dᵀ(D w)
//   4. t returns to the workers, which finish z = Vᵀ t locally
// All cross-worker sums run through exact accumulators, so the result is
// bit-identical to the serial operator for every worker count and both
// scheduler modes; merging happens in worker order only for bookkeeping.
//
// Communication accounting per apply (values of payload):
//   matrix: l·n_c inbound + l·n_c outbound, central's own copies included.
//   graph:  (Σ rep - l) each way; the co-located replica of each row is free.
// Scalar reductions (dot, norm, absolute sum) cost 2·n_c (matrix) or
// 2·(n_c - 1) (graph). Accumulator merges are message handling, not counted
// as arithmetic.
class DistExec {
public:
    DistExec(const DenseMatrix& d, const SparseColMatrix& v, const DistConfig& cfg)
        : d_(&d), v_(&v), cfg_(cfg), part_(make_partition(v.cols(), cfg.n_workers)) {
        if (d.cols() != v.rows())
            throw DimensionError("DistExec: dictionary cols must equal coefficient rows");
        if (cfg.model == ExecModel::full)
            throw InvalidArgumentError("DistExec: the full model runs on the serial path");
        rep_ = replication_counts(v, part_);
        sum_rep_ = 0;
        for (std::size_t r : rep_) sum_rep_ += r;
    }

    std::size_t dim() const { return v_->cols(); }
    std::size_t workers() const { return part_.workers(); }
    const WorkerPartition& partition() const { return part_; }
    const std::vector<std::size_t>& replication() const { return rep_; }
    std::uint64_t sum_rep() const { return sum_rep_; }
    ExecModel model() const { return cfg_.model; }

    // Payload values exchanged for one reduce-broadcast of per-row data.
    std::uint64_t row_exchange_comm() const {
        const std::uint64_t l = v_->rows();
        if (cfg_.model == ExecModel::matrix) return l * workers();
        return sum_rep_ - l;
    }

    // Payload values exchanged to reduce and redistribute one scalar.
    std::uint64_t scalar_comm() const {
        if (cfg_.model == ExecModel::matrix) return 2 * workers();
        return 2 * (workers() - 1);
    }

    // Payload values to scatter one coefficient-space vector from the
    // central node to its owners.
    std::uint64_t scatter_comm() const {
        if (cfg_.model == ExecModel::matrix) return dim();
        return dim() - part_.size(0);
    }

    // Stored entries, by the declared convention for each model.
    std::uint64_t memory_entries() const {
        const std::uint64_t nnz = v_->nnz();
        const std::uint64_t l = v_->rows();
        const std::uint64_t m = d_->rows();
        const std::uint64_t n = v_->cols();
        if (cfg_.model == ExecModel::matrix) return 2 * nnz + l * m + n + m;
        return (nnz + l) + (n + sum_rep_);
    }

    Vector apply(const Vector& x, CostContext& ctx) const {
        if (x.size() != dim()) throw DimensionError("DistExec::apply: x length mismatch");
        const std::size_t l = v_->rows();
        const std::size_t n = v_->cols();
        const std::size_t nw = workers();
        const auto& cp = v_->col_ptr();
        const auto& ri = v_->row_idx();
        const auto& vs = v_->values();

        // 1. local accumulation
        std::vector<std::vector<ExactAccumulator>> acc(nw);
        std::vector<CostContext> local(nw);
        for_workers([&](std::size_t w) {
            acc[w].assign(l, ExactAccumulator{});
            std::uint64_t ops = 0;
            for (std::size_t j = part_.begin(w); j < part_.end(w); ++j) {
                const double xj = x[j];
                for (std::size_t t = cp[j]; t < cp[j + 1]; ++t) acc[w][ri[t]].add(vs[t] * xj);
                ops += cp[j + 1] - cp[j];
            }
            local[w].count_mults(ops);
            local[w].count_adds(ops);
        });
        for (const auto& c : local) ctx.merge(c);

        // 2. gather at the central node
        ctx.count_comm(row_exchange_comm());
        Vector wvec(l, 0.0);
        for (std::size_t i = 0; i < l; ++i) {
            ExactAccumulator total;
            for (std::size_t w = 0; w < nw; ++w) total.merge(acc[w][i]);
            wvec[i] = total.round();
        }

        // 3. central dense hops
        const Vector u = dense_matvec(*d_, wvec, false, ctx);
        const Vector t = dense_matvec(*d_, u, true, ctx);

        // 4. broadcast, then local transpose products
        ctx.count_comm(row_exchange_comm());
        Vector z(n, 0.0);
        for (std::size_t w = 0; w < nw; ++w) local[w].reset();
        for_workers([&](std::size_t w) {
            std::uint64_t ops = 0;
            for (std::size_t j = part_.begin(w); j < part_.end(w); ++j) {
                double s = 0.0;
                for (std::size_t tt = cp[j]; tt < cp[j + 1]; ++tt) s += vs[tt] * t[ri[tt]];
                z[j] = s;
                ops += cp[j + 1] - cp[j];
            }
            local[w].count_mults(ops);
            local[w].count_adds(ops);
        });
        for (const auto& c : local) ctx.merge(c);
        return z;
    }

    double dot(const Vector& a, const Vector& b, CostContext& ctx) const {
        return reduce(ctx, true, [&](std::size_t j) { return a[j] * b[j]; });
    }

    double norm_sq(const Vector& v, CostContext& ctx) const {
        return reduce(ctx, true, [&](std::size_t j) { return v[j] * v[j]; });
    }

    double abs_sum(const Vector& v, CostContext& ctx) const {
        return reduce(ctx, false, [&](std::size_t j) { return std::abs(v[j]); });
    }

    void scatter_cost(CostContext& ctx) const { ctx.count_comm(scatter_comm()); }

    // b = Aᵀ y computed in place across the workers: the central node forms
    // t = Dᵀ y and sends it out once, the workers finish their chunk of Vᵀ t.
    Vector correlate(const Vector& y, CostContext& ctx) const {
        if (y.size() != d_->rows()) throw DimensionError("DistExec::correlate: y length mismatch");
        const Vector t = dense_matvec(*d_, y, true, ctx);
        ctx.count_comm(row_exchange_comm());
        const auto& cp = v_->col_ptr();
        const auto& ri = v_->row_idx();
        const auto& vs = v_->values();
        Vector b(dim(), 0.0);
        std::vector<CostContext> local(workers());
        for_workers([&](std::size_t w) {
            std::uint64_t ops = 0;
            for (std::size_t j = part_.begin(w); j < part_.end(w); ++j) {
                double s = 0.0;
                for (std::size_t tt = cp[j]; tt < cp[j + 1]; ++tt) s += vs[tt] * t[ri[tt]];
                b[j] = s;
                ops += cp[j + 1] - cp[j];
            }
            local[w].count_mults(ops);
            local[w].count_adds(ops);
        });
        for (const auto& c : local) ctx.merge(c);
        return b;
    }

private:
    template <typename Fn>
    void for_workers(Fn&& fn) const {
        const std::size_t nw = workers();
        if (cfg_.scheduler == Scheduler::sequential) {
            for (std::size_t w = 0; w < nw; ++w) fn(w);
            return;
        }
        parallel_ranges(nw, nw, [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t w = begin; w < end; ++w) fn(w);
        });
    }

    template <typename Term>
    double reduce(CostContext& ctx, bool term_multiplies, Term&& term) const {
        const std::size_t nw = workers();
        std::vector<ExactAccumulator> acc(nw);
        std::vector<CostContext> local(nw);
        for_workers([&](std::size_t w) {
            for (std::size_t j = part_.begin(w); j < part_.end(w); ++j) acc[w].add(term(j));
            if (term_multiplies) local[w].count_mults(part_.size(w));
            local[w].count_adds(part_.size(w));
        });
        for (const auto& c : local) ctx.merge(c);
        ctx.count_comm(scalar_comm());
        ExactAccumulator total;
        for (std::size_t w = 0; w < nw; ++w) total.merge(acc[w]);
        return total.round();
    }

    const DenseMatrix* d_;
    const SparseColMatrix* v_;
    DistConfig cfg_;
    WorkerPartition part_;
    std::vector<std::size_t> rep_;
    std::uint64_t sum_rep_ = 0;
};

// Distributed sparse regression: b = Aᵀy forms across the workers, then the
// iteration runs with every reduction exact, so the returned iterate is
// bit-identical to the serial solver on the same factorization and flags.
inline IstResult run_distributed_ist(const DenseMatrix& d, const SparseColMatrix& v,
                                     const Vector& y, const IstConfig& icfg,
                                     const DistConfig& dcfg, CostContext& ctx) {
    const DistExec exec(d, v, dcfg);
    const Vector b = exec.correlate(y, ctx);
    return ist_solve_exec(exec, b, icfg, ctx);
}

// Distributed eigenpair extraction on the factored operator.
inline PowerResult run_distributed_power(const DenseMatrix& d, const SparseColMatrix& v,
                                         const PowerConfig& pcfg, const DistConfig& dcfg,
                                         CostContext& ctx) {
    const DistExec exec(d, v, dcfg);
    return power_eigs_exec(exec, pcfg, ctx);
}

}  // namespace rankmap
