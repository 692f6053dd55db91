#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "rankmap/cost.hpp"
#include "rankmap/dense_matrix.hpp"
#include "rankmap/errors.hpp"
#include "rankmap/parallel.hpp"
#include "rankmap/qr.hpp"
#include "rankmap/rng.hpp"
#include "rankmap/sparse_matrix.hpp"

namespace rankmap {

// Relative residuals below this count as converged. Lets a zero tolerance
// terminate at floating-point noise instead of looping on ~1e-16 residuals.
inline constexpr double kResidualFloor = 1e-12;

// Incremental residual estimates tracked within a selection round accumulate
// roundoff from repeated subtraction; below this relative level they are
// noise. The estimates may end a round early, but only the from-scratch
// residual check at the next round boundary can end selection itself.
inline constexpr double kEstimateFloor = 1e-6;

// Configuration for the sequential column-selection decomposition.
// Zero-valued size fields resolve to defaults against the input shape.
struct CssdConfig {
    double delta_d = 0.1;      // per-column relative residual tolerance, in [0, 1)
    std::size_t max_cols = 0;  // selection cap l; 0 -> min(rows, cols)
    std::size_t batch_size = 0;  // columns drawn per round; 0 -> max(1, max_cols/10)
    std::size_t max_atoms = 0;   // sparse-coding cap per column; 0 -> max_cols
    std::size_t workers = 1;     // threads for per-column passes
    std::uint64_t seed = 0;
};

struct ResolvedCssd {
    double delta_d;
    std::size_t l_max;
    std::size_t l_s;
    std::size_t k_max;
    std::size_t workers;
    std::uint64_t seed;
};

inline ResolvedCssd resolve(const CssdConfig& cfg, std::size_t m, std::size_t n) {
    if (m == 0 || n == 0) throw DimensionError("decompose: empty input matrix");
    if (!(cfg.delta_d >= 0.0 && cfg.delta_d < 1.0))
        throw InvalidArgumentError("decompose: delta_d must lie in [0, 1)");
    ResolvedCssd r;
    r.delta_d = cfg.delta_d;
    r.l_max = cfg.max_cols == 0 ? std::min(m, n) : cfg.max_cols;
    if (r.l_max < 1 || r.l_max > n)
        throw InvalidArgumentError("decompose: max_cols must lie in [1, cols]");
    r.l_s = cfg.batch_size == 0 ? std::max<std::size_t>(1, r.l_max / 10) : cfg.batch_size;
    if (r.l_s < 1 || r.l_s > r.l_max)
        throw InvalidArgumentError("decompose: batch_size must lie in [1, max_cols]");
    r.k_max = cfg.max_atoms == 0 ? r.l_max : cfg.max_atoms;
    if (r.k_max < 1) throw InvalidArgumentError("decompose: max_atoms must be positive");
    r.workers = cfg.workers == 0 ? 1 : cfg.workers;
    r.seed = cfg.seed;
    return r;
}

// Output of decompose: A ~= D V with unit-norm dictionary columns drawn from
// A itself and a sparse coefficient matrix.
struct Factorization {
    DenseMatrix d;                      // m x l, unit-norm columns
    SparseColMatrix v;                  // l x n
    std::vector<std::size_t> selected;  // source column of each dictionary atom
    double delta_d = 0.0;               // configured tolerance
    double achieved_delta = 0.0;        // max relative column residual
    Vector column_residuals;            // relative residual per source column
    std::vector<std::size_t> zero_columns;  // columns with zero norm, skipped

    std::size_t l() const { return d.cols(); }
    std::size_t nnz() const { return v.nnz(); }
    // Tolerance met, up to the floating-point floor for tiny delta_d.
    bool success() const { return achieved_delta <= std::max(delta_d, kResidualFloor); }
    double density_ratio() const {
        return static_cast<double>(v.nnz()) /
               (static_cast<double>(d.rows()) * static_cast<double>(v.cols()));
    }
};

struct SelectionScores {
    Vector scores;  // relative projection residual per column; 0 on selected/zero columns
    std::vector<std::size_t> zero_columns;
    double max_unselected = 0.0;
};

namespace detail {

// Residual magnitude of every column of a against the span of the selected
// columns. Selected and zero-norm columns score zero. With nothing selected,
// every non-zero column scores one (the uniform case). When span_out is
// given it receives the factorization of the selected span (null while
// nothing is selected) so the caller can reuse the projector.
inline SelectionScores selection_scores(const DenseMatrix& a,
                                        const std::vector<std::size_t>& selected,
                                        const Vector& norms, std::size_t workers,
                                        CostContext& ctx,
                                        std::unique_ptr<ColPivQr>* span_out = nullptr) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    SelectionScores out;
    out.scores.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (norms[i] == 0.0) out.zero_columns.push_back(i);

    std::vector<char> is_sel(n, 0);
    for (std::size_t s : selected) is_sel[s] = 1;

    if (selected.empty()) {
        for (std::size_t i = 0; i < n; ++i)
            if (norms[i] > 0.0) out.scores[i] = 1.0;
        out.max_unselected = out.zero_columns.size() < n ? 1.0 : 0.0;
        return out;
    }

    DenseMatrix basis(m, selected.size());
    for (std::size_t j = 0; j < selected.size(); ++j) {
        const double* src = a.col(selected[j]);
        double* dst = basis.col(j);
        const double inv = 1.0 / norms[selected[j]];
        for (std::size_t i = 0; i < m; ++i) dst[i] = src[i] * inv;
    }
    auto qr = std::make_unique<ColPivQr>(basis, ctx);

    std::vector<CostContext> local(std::max<std::size_t>(workers, 1));
    parallel_ranges(n, workers, [&](std::size_t begin, std::size_t end, std::size_t slot) {
        Vector work(m);
        for (std::size_t i = begin; i < end; ++i) {
            if (is_sel[i] || norms[i] == 0.0) continue;
            const double* col = a.col(i);
            std::copy(col, col + m, work.begin());
            qr->project_inplace(work.data(), local[slot]);
            double acc = 0.0;
            for (std::size_t r = 0; r < m; ++r) {
                const double diff = col[r] - work[r];
                acc += diff * diff;
            }
            local[slot].count_mults(m);
            local[slot].count_adds(2 * m);
            out.scores[i] = std::sqrt(acc) / norms[i];
        }
    });
    for (const auto& c : local) ctx.merge(c);

    for (std::size_t i = 0; i < n; ++i)
        if (!is_sel[i] && norms[i] > 0.0)
            out.max_unselected = std::max(out.max_unselected, out.scores[i]);
    if (span_out) *span_out = std::move(qr);
    return out;
}

}  // namespace detail

// Probability of picking each column next: proportional to its relative
// residual against the span of the already-selected columns. Uniform over
// non-zero columns when nothing is selected yet; all-zero when every column
// is already represented. Zero-norm columns get probability zero and are
// reported through zero_columns_out when provided.
inline Vector selection_distribution(const DenseMatrix& a,
                                     const std::vector<std::size_t>& selected,
                                     std::vector<std::size_t>* zero_columns_out = nullptr) {
    CostContext ctx;
    const Vector norms = column_norms(a, ctx);
    SelectionScores s = detail::selection_scores(a, selected, norms, 1, ctx);
    if (zero_columns_out) *zero_columns_out = s.zero_columns;
    double total = 0.0;
    for (double v : s.scores) total += v;
    Vector p(std::move(s.scores));
    if (total > 0.0)
        for (double& v : p) v /= total;
    return p;
}

// Selection state carried across resumed decompositions: tightening the
// tolerance later only adds columns and continues the same draw sequence.
struct SelectionState {
    explicit SelectionState(std::uint64_t seed) : rng(seed) {}
    std::vector<std::size_t> selected;
    std::vector<char> is_selected;
    Rng rng;
    bool started = false;
};

namespace detail {

// Residual of column c against the selected span (span, may be null) plus the
// directions accepted so far this round. Two projection passes keep the
// result orthogonal enough to trust near the stopping floor. Leaves the
// unnormalized residual in v and returns its norm.
inline double round_residual(const DenseMatrix& a, std::size_t c, const ColPivQr* span,
                             const std::vector<Vector>& dirs, Vector& v, CostContext& ctx) {
    const std::size_t m = a.rows();
    const double* col = a.col(c);
    std::copy(col, col + m, v.begin());
    Vector proj(m);
    for (int pass = 0; pass < 2; ++pass) {
        if (span) {
            std::copy(v.begin(), v.end(), proj.begin());
            span->project_inplace(proj.data(), ctx);
            for (std::size_t i = 0; i < m; ++i) v[i] -= proj[i];
            ctx.count_adds(m);
        }
        for (const Vector& q : dirs) {
            double dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) dot += q[i] * v[i];
            for (std::size_t i = 0; i < m; ++i) v[i] -= dot * q[i];
            ctx.count_mults(2 * m);
            ctx.count_adds(2 * m);
        }
    }
    double nsq = 0.0;
    for (double e : v) nsq += e * e;
    ctx.count_mults(m);
    ctx.count_adds(m);
    return std::sqrt(nsq);
}

inline void select_columns_resume(const DenseMatrix& a, const ResolvedCssd& cfg,
                                  SelectionState& state, CostContext& ctx) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (state.is_selected.empty()) state.is_selected.assign(n, 0);
    if (state.is_selected.size() != n)
        throw InvalidArgumentError("select_columns: selection state built for a different matrix");
    const Vector norms = column_norms(a, ctx);

    if (!state.started) {
        bool any = false;
        for (std::size_t i = 0; i < n && !any; ++i) any = norms[i] > 0.0;
        if (!any) throw DegenerateInputError("select_columns: input has no non-zero column");
        state.started = true;
    }

    const double stop_at = std::max(cfg.delta_d, kResidualFloor);
    const double est_stop = std::max(stop_at, kEstimateFloor);

    while (state.selected.size() < cfg.l_max) {
        // From-scratch residuals: the certified stop check and the sampling
        // weights for this round.
        std::unique_ptr<ColPivQr> span;
        const SelectionScores s =
            selection_scores(a, state.selected, norms, cfg.workers, ctx, &span);
        if (s.max_unselected <= stop_at) break;

        Vector weights(n, 0.0);
        Vector est_sq(n, 0.0);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!state.is_selected[i] && s.scores[i] > 0.0) {
                weights[i] = s.scores[i];
                const double r = s.scores[i] * norms[i];
                est_sq[i] = r * r;
                any = true;
            }
        }
        if (!any) break;

        // Sequential sampling without replacement: each draw removes the
        // chosen column's weight. A draw is accepted only if it still carries
        // residual against the span grown this round; redundant draws are
        // passed over without consuming the round's quota. After each
        // acceptance every remaining column's residual estimate shrinks by
        // its component along the new direction, and the round ends early
        // once the estimates put every column within tolerance.
        std::vector<Vector> dirs;
        Vector v(m);
        std::size_t quota = std::min(cfg.l_s, cfg.l_max - state.selected.size());
        while (quota > 0) {
            double total = 0.0;
            for (double w : weights) total += w;
            if (total <= 0.0) break;
            const std::size_t pick = state.rng.sample_discrete(weights);
            weights[pick] = 0.0;

            const double rn = round_residual(a, pick, span.get(), dirs, v, ctx);
            if (rn <= stop_at * norms[pick]) continue;

            Vector q(m);
            const double inv = 1.0 / rn;
            for (std::size_t i = 0; i < m; ++i) q[i] = v[i] * inv;
            ctx.count_mults(m);
            state.selected.push_back(pick);
            state.is_selected[pick] = 1;
            --quota;

            double max_rel = 0.0;
            std::size_t touched = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (state.is_selected[i] || norms[i] == 0.0) continue;
                const double* ci = a.col(i);
                double dot = 0.0;
                for (std::size_t r = 0; r < m; ++r) dot += q[r] * ci[r];
                est_sq[i] = std::max(est_sq[i] - dot * dot, 0.0);
                max_rel = std::max(max_rel, std::sqrt(est_sq[i]) / norms[i]);
                ++touched;
            }
            ctx.count_mults(touched * (m + 1));
            ctx.count_adds(touched * m);
            dirs.push_back(std::move(q));
            if (max_rel <= est_stop) break;
        }
    }
}

}  // namespace detail

// Adaptive column selection: rounds of up to batch_size columns are drawn
// from the residual-driven distribution until every unselected column sits
// within delta_d of the selected span or max_cols is reached. Draws that are
// already represented by the span are passed over, and a round ends as soon
// as the remaining residuals drop within tolerance, so exactly rank(A)
// columns come out of exact-rank input at delta_d = 0.
inline std::vector<std::size_t> select_columns(const DenseMatrix& a, const CssdConfig& cfg) {
    const ResolvedCssd r = resolve(cfg, a.rows(), a.cols());
    SelectionState state(r.seed);
    CostContext ctx;
    detail::select_columns_resume(a, r, state, ctx);
    return state.selected;
}

struct OmpResult {
    std::vector<std::pair<std::size_t, double>> entries;  // (dictionary row, coefficient), row-sorted
    double rel_residual = 0.0;
};

// Batch orthogonal matching pursuit against a fixed dictionary with unit-norm
// columns. The Gram matrix DᵀD is computed once and shared across encodes;
// the active-set Cholesky factor grows by one row per atom, and the residual
// norm is tracked through the recurrence on |r|^2 rather than recomputed.
class BatchOmp {
public:
    BatchOmp(const DenseMatrix& d, CostContext& ctx) : d_(d), l_(d.cols()) {
        gram_ = DenseMatrix(l_, l_);
        for (std::size_t p = 0; p < l_; ++p) {
            for (std::size_t q = p; q < l_; ++q) {
                const double* cp = d_.col(p);
                const double* cq = d_.col(q);
                double acc = 0.0;
                for (std::size_t i = 0; i < d_.rows(); ++i) acc += cp[i] * cq[i];
                gram_(p, q) = acc;
                gram_(q, p) = acc;
            }
        }
        ctx.count_mults(d_.rows() * l_ * (l_ + 1) / 2);
        ctx.count_adds(d_.rows() * l_ * (l_ + 1) / 2);
    }

    const DenseMatrix& dictionary() const { return d_; }

    // Encodes one m-vector to relative accuracy delta (or k_max atoms,
    // whichever binds first). A zero vector and delta >= 1 both yield the
    // empty column.
    OmpResult encode(const double* a, double delta, std::size_t k_max, CostContext& ctx) const {
        const std::size_t m = d_.rows();
        OmpResult out;
        double anorm_sq = 0.0;
        for (std::size_t i = 0; i < m; ++i) anorm_sq += a[i] * a[i];
        ctx.count_mults(m);
        ctx.count_adds(m);
        if (anorm_sq == 0.0) return out;

        const double delta_eff = std::max(delta, kResidualFloor);
        const double target_sq = delta_eff * delta_eff * anorm_sq;
        if (anorm_sq <= target_sq) {
            out.rel_residual = 1.0;
            return out;
        }

        k_max = std::min(k_max, l_);
        Vector alpha0(l_, 0.0);
        for (std::size_t j = 0; j < l_; ++j) {
            const double* col = d_.col(j);
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += col[i] * a[i];
            alpha0[j] = acc;
        }
        ctx.count_mults(m * l_);
        ctx.count_adds(m * l_);

        Vector alpha(alpha0);
        std::vector<std::size_t> active;
        std::vector<char> in_active(l_, 0);
        Vector chol;  // packed lower-triangular rows
        Vector gamma;
        Vector w(k_max, 0.0);
        Vector z(k_max, 0.0);

        while (active.size() < k_max) {
            std::size_t best = l_;
            double best_abs = 0.0;
            for (std::size_t j = 0; j < l_; ++j) {
                if (in_active[j]) continue;
                const double v = std::abs(alpha[j]);
                if (v > best_abs) {
                    best_abs = v;
                    best = j;
                }
            }
            if (best == l_ || best_abs == 0.0) break;

            const std::size_t k = active.size();
            for (std::size_t r = 0; r < k; ++r) {
                double acc = gram_(active[r], best);
                for (std::size_t c = 0; c < r; ++c) acc -= chol[r * (r + 1) / 2 + c] * w[c];
                w[r] = acc / chol[r * (r + 1) / 2 + r];
            }
            double dsq = 1.0;
            for (std::size_t r = 0; r < k; ++r) dsq -= w[r] * w[r];
            ctx.count_mults(k * (k + 1) / 2 + k);
            ctx.count_adds(k * (k + 1) / 2 + k);
            if (dsq <= 1e-12) break;  // atom numerically dependent on active set

            for (std::size_t r = 0; r < k; ++r) chol.push_back(w[r]);
            chol.push_back(std::sqrt(dsq));
            active.push_back(best);
            in_active[best] = 1;
            const std::size_t ka = active.size();

            for (std::size_t r = 0; r < ka; ++r) {
                double acc = alpha0[active[r]];
                for (std::size_t c = 0; c < r; ++c) acc -= chol[r * (r + 1) / 2 + c] * z[c];
                z[r] = acc / chol[r * (r + 1) / 2 + r];
            }
            gamma.assign(ka, 0.0);
            for (std::size_t r = ka; r-- > 0;) {
                double acc = z[r];
                for (std::size_t c = r + 1; c < ka; ++c) acc -= chol[c * (c + 1) / 2 + r] * gamma[c];
                gamma[r] = acc / chol[r * (r + 1) / 2 + r];
            }
            ctx.count_mults(ka * (ka + 1));
            ctx.count_adds(ka * (ka + 1));

            double fit = 0.0;
            for (std::size_t r = 0; r < ka; ++r) fit += gamma[r] * alpha0[active[r]];
            const double err_sq = std::max(anorm_sq - fit, 0.0);
            ctx.count_mults(ka);
            ctx.count_adds(ka);
            if (err_sq <= target_sq) break;
            // anorm_sq - fit cancels to noise of order eps*anorm_sq, so for
            // tight targets the recurrence alone can never certify the stop;
            // once it is this small, check the actual residual before
            // spending atoms on what may already be an exact representation.
            if (err_sq <= 1e-8 * anorm_sq) {
                Vector res(a, a + m);
                for (std::size_t r = 0; r < ka; ++r) {
                    const double* col = d_.col(active[r]);
                    const double g = gamma[r];
                    for (std::size_t i = 0; i < m; ++i) res[i] -= g * col[i];
                }
                double true_sq = 0.0;
                for (std::size_t i = 0; i < m; ++i) true_sq += res[i] * res[i];
                ctx.count_mults(m * (ka + 1));
                ctx.count_adds(m * (ka + 1));
                if (true_sq <= target_sq) break;
            }

            // alpha = alpha0 - G_active gamma, used only to pick the next atom
            std::copy(alpha0.begin(), alpha0.end(), alpha.begin());
            for (std::size_t r = 0; r < ka; ++r) {
                const double* gcol = gram_.col(active[r]);
                const double g = gamma[r];
                for (std::size_t j = 0; j < l_; ++j) alpha[j] -= g * gcol[j];
            }
            ctx.count_mults(ka * l_);
            ctx.count_adds(ka * l_);
        }

        // An atom picked on a marginal correlation before the true support
        // completed ends with a coefficient at rounding-noise level once the
        // fit is exact (the exact representation is unique, so its share is
        // zero). Keep only material coefficients; the residual recomputed
        // below polices any drop that actually mattered.
        const double prune = 1e-10 * std::sqrt(anorm_sq);
        out.entries.reserve(active.size());
        for (std::size_t r = 0; r < active.size(); ++r)
            if (std::abs(gamma[r]) > prune) out.entries.emplace_back(active[r], gamma[r]);
        std::sort(out.entries.begin(), out.entries.end());

        // Exact residual of the returned coefficients; the recurrence above
        // only steers the stopping rule.
        Vector res(a, a + m);
        for (const auto& [row, coef] : out.entries) {
            const double* col = d_.col(row);
            for (std::size_t i = 0; i < m; ++i) res[i] -= coef * col[i];
        }
        double rsq = 0.0;
        for (std::size_t i = 0; i < m; ++i) rsq += res[i] * res[i];
        ctx.count_mults(m * (out.entries.size() + 1));
        ctx.count_adds(m * (out.entries.size() + 1));
        out.rel_residual = std::sqrt(rsq / anorm_sq);
        return out;
    }

private:
    const DenseMatrix& d_;
    std::size_t l_;
    DenseMatrix gram_;
};

// One-off encode of a single vector; builds the dictionary Gram each call.
// Callers encoding many vectors should hold a BatchOmp instead.
inline OmpResult omp_encode(const Vector& a, const DenseMatrix& d, double delta,
                            std::size_t k_max) {
    if (a.size() != d.rows()) throw DimensionError("omp_encode: vector length must equal dictionary rows");
    CostContext ctx;
    BatchOmp omp(d, ctx);
    return omp.encode(a.data(), delta, k_max, ctx);
}

namespace detail {

inline Factorization decompose_resume(const DenseMatrix& a, const CssdConfig& cfg,
                                      SelectionState& state, CostContext& ctx) {
    const ResolvedCssd r = resolve(cfg, a.rows(), a.cols());
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();

    select_columns_resume(a, r, state, ctx);
    const std::vector<std::size_t>& selected = state.selected;
    const std::size_t l = selected.size();

    const Vector norms = column_norms(a, ctx);
    DenseMatrix d(m, l);
    for (std::size_t j = 0; j < l; ++j) {
        const double* src = a.col(selected[j]);
        double* dst = d.col(j);
        const double inv = 1.0 / norms[selected[j]];
        for (std::size_t i = 0; i < m; ++i) dst[i] = src[i] * inv;
    }
    ctx.count_mults(m * l);

    std::vector<std::size_t> pos_of_selected(n, n);
    for (std::size_t j = 0; j < l; ++j) pos_of_selected[selected[j]] = j;

    BatchOmp omp(d, ctx);
    const std::size_t k_max = std::min(r.k_max, l);

    std::vector<std::vector<std::pair<std::size_t, double>>> cols(n);
    Vector residuals(n, 0.0);
    std::vector<CostContext> local(std::max<std::size_t>(r.workers, 1));
    parallel_ranges(n, r.workers, [&](std::size_t begin, std::size_t end, std::size_t slot) {
        for (std::size_t i = begin; i < end; ++i) {
            if (norms[i] == 0.0) continue;
            const double* col = a.col(i);
            if (pos_of_selected[i] < n) {
                // A selected column is its own atom scaled back to length.
                const std::size_t pos = pos_of_selected[i];
                cols[i].emplace_back(pos, norms[i]);
                const double* atom = d.col(pos);
                double rsq = 0.0;
                for (std::size_t t = 0; t < m; ++t) {
                    const double diff = col[t] - norms[i] * atom[t];
                    rsq += diff * diff;
                }
                local[slot].count_mults(2 * m);
                local[slot].count_adds(2 * m);
                residuals[i] = std::sqrt(rsq) / norms[i];
                continue;
            }
            OmpResult enc = omp.encode(col, r.delta_d, k_max, local[slot]);
            cols[i] = std::move(enc.entries);
            residuals[i] = enc.rel_residual;
        }
    });
    for (const auto& c : local) ctx.merge(c);

    Factorization f;
    f.d = std::move(d);
    f.v = SparseColMatrix::from_columns(l, cols);
    f.selected = selected;
    f.delta_d = r.delta_d;
    f.column_residuals = std::move(residuals);
    for (std::size_t i = 0; i < n; ++i)
        if (norms[i] == 0.0) f.zero_columns.push_back(i);
    f.achieved_delta = 0.0;
    for (double rr : f.column_residuals) f.achieved_delta = std::max(f.achieved_delta, rr);
    return f;
}

}  // namespace detail

// Full decomposition: select columns, then sparse-code every column of A
// against the selected dictionary. Identical seed, config, and data give a
// bit-identical factorization regardless of the worker count.
inline Factorization decompose(const DenseMatrix& a, const CssdConfig& cfg, CostContext& ctx) {
    SelectionState state(cfg.seed);
    return detail::decompose_resume(a, cfg, state, ctx);
}

// Decomposition that continues from earlier selection state: a later call
// with a tighter tolerance keeps every previously selected column and only
// extends the set, so sweeps over delta_d reuse work monotonically.
inline Factorization decompose_resume(const DenseMatrix& a, const CssdConfig& cfg,
                                      SelectionState& state, CostContext& ctx) {
    return detail::decompose_resume(a, cfg, state, ctx);
}

inline Factorization decompose(const DenseMatrix& a, const CssdConfig& cfg) {
    CostContext ctx;
    return decompose(a, cfg, ctx);
}

}  // namespace rankmap
