// Command-line front end: dataset generation, decomposition, solvers on the
// factored operator, tolerance tuning, and benchmark tables.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.
//
// Reports are deterministic: identical flags and seed give byte-identical
// report and CSV files. Wall-clock times and timestamps never enter those
// files; they land in a "<output>.timing.json" sidecar instead.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "rankmap/rankmap.hpp"

namespace {

using namespace rankmap;
using nlohmann::json;

// --------------------------------------------------------------------------
// Small utilities
// --------------------------------------------------------------------------

std::uint64_t seed_fallback() {
    const char* s = std::getenv("RANKMAP_SEED");
    if (!s || *s == '\0') return 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0')
        throw InvalidArgumentError("RANKMAP_SEED must be a non-negative integer");
    return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

MatrixFormat format_for(const std::string& path, const std::string& override_name) {
    if (override_name == "raw") return MatrixFormat::raw_f64;
    if (override_name == "mtx") return MatrixFormat::matrix_market;
    return ends_with(path, ".mtx") ? MatrixFormat::matrix_market : MatrixFormat::raw_f64;
}

void save_matrix(const DenseMatrix& a, const std::string& path, const std::string& fmt) {
    if (format_for(path, fmt) == MatrixFormat::raw_f64)
        save_raw_f64(a, path);
    else
        save_matrix_market(a, path);
}

Vector load_signal(const std::string& path, const std::string& fmt) {
    const DenseMatrix s = load_matrix(path, format_for(path, fmt));
    if (s.rows() != 1 && s.cols() != 1)
        throw InvalidArgumentError("signal file must hold a single row or column: " + path);
    return s.data();
}

void save_signal(const Vector& x, const std::string& path, const std::string& fmt) {
    save_matrix(DenseMatrix(x.size(), 1, x), path, fmt);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// JSON has no infinity; report it as a string so the field survives dumping.
json json_double(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

json counters_json(const CostCounters& c) {
    return json{{"multiplications", c.multiplications},
                {"additions", c.additions},
                {"communicated_values", c.communicated_values},
                {"memory_entries", c.memory_entries}};
}

json factor_summary(const DenseMatrix& a, const Factorization& f) {
    const double denom = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
    return json{{"l", f.l()},
                {"nnz_v", f.nnz()},
                {"density_ratio", static_cast<double>(f.nnz()) / denom},
                {"achieved_delta", f.achieved_delta},
                {"delta_d", f.delta_d},
                {"zero_columns", f.zero_columns.size()}};
}

void write_text(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path);
    f << data;
    if (!f) throw Error("write failed for " + path);
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(clock::now() - start_).count();
    }

private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_ = clock::now();
};

// Non-deterministic data (timestamps, wall times) goes in a sidecar so the
// main report stays byte-identical across runs.
void write_timing_sidecar(const std::string& main_output, const json& wall_seconds) {
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    json t;
    t["timestamp_utc"] = stamp;
    t["wall_seconds"] = wall_seconds;
    write_text(main_output + ".timing.json", t.dump(2) + "\n");
}

void write_report(const json& report, const std::string& path, const json& wall_seconds) {
    if (path.empty()) return;
    save_report(report, path);
    write_timing_sidecar(path, wall_seconds);
}

ExecModel parse_model(const std::string& name) {
    if (name == "matrix") return ExecModel::matrix;
    if (name == "graph") return ExecModel::graph;
    return ExecModel::full;
}

// --------------------------------------------------------------------------
// gen
// --------------------------------------------------------------------------

struct GenArgs {
    std::string kind = "low_rank";
    std::size_t m = 0, n = 0, rank = 0, subspaces = 1;
    double noise = 0.0;
    std::uint64_t seed = seed_fallback();
    std::string out, fmt = "auto";
};

int run_gen(const GenArgs& a) {
    DatasetSpec spec;
    if (a.kind == "low_rank") spec.kind = DatasetKind::low_rank;
    else if (a.kind == "union_of_subspaces") spec.kind = DatasetKind::union_of_subspaces;
    else spec.kind = DatasetKind::block_diagonal_v;
    spec.m = a.m;
    spec.n = a.n;
    spec.rank = a.rank;
    spec.subspaces = a.subspaces;
    spec.noise = a.noise;
    spec.seed = a.seed;
    save_matrix(generate(spec), a.out, a.fmt);
    std::cout << "wrote " << a.out << " (" << a.m << "x" << a.n << ", " << a.kind << ")\n";
    return 0;
}

// --------------------------------------------------------------------------
// decompose
// --------------------------------------------------------------------------

struct DecomposeArgs {
    std::string input, fmt = "auto";
    double delta_d = 0.1;
    std::size_t max_cols = 0, batch = 0, max_atoms = 0, workers = 1;
    std::uint64_t seed = seed_fallback();
    std::string out_prefix, report;
};

int run_decompose(const DecomposeArgs& a) {
    const DenseMatrix mat = load_matrix(a.input, format_for(a.input, a.fmt));
    CssdConfig cfg;
    cfg.delta_d = a.delta_d;
    cfg.max_cols = a.max_cols;
    cfg.batch_size = a.batch;
    cfg.max_atoms = a.max_atoms;
    cfg.workers = a.workers;
    cfg.seed = a.seed;

    Timer timer;
    CostContext ctx;
    const Factorization f = decompose(mat, cfg, ctx);
    const double wall = timer.seconds();
    if (!a.out_prefix.empty()) save_factorization(f, a.out_prefix, a.seed);

    json report;
    report["command"] = "decompose";
    report["config"] = {{"input", a.input},    {"delta_d", a.delta_d},
                        {"max_cols", a.max_cols}, {"batch", a.batch},
                        {"max_atoms", a.max_atoms}, {"workers", a.workers},
                        {"seed", a.seed}};
    report["factorization"] = factor_summary(mat, f);
    report["cost"] = counters_json(ctx.counters());
    write_report(report, a.report, json{{"decompose", wall}});

    std::cout << "l=" << f.l() << " nnz(V)=" << f.nnz()
              << " achieved_delta=" << fmt_double(f.achieved_delta) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// solve
// --------------------------------------------------------------------------

struct SolveArgs {
    std::string algorithm;  // fista | power
    std::string factors, matrix, fmt = "auto";
    std::string model = "matrix";
    std::size_t workers = 1;
    std::string scheduler = "sequential";
    bool cached_gram = false;

    // fista
    std::string signal;
    double lambda = 0.1;
    double tol = 1e-8;
    std::size_t iters = 500;
    bool no_accel = false;
    bool objective = false;
    double target_psnr = 0.0;  // 0 disables the quality stopping rule
    double psnr_max = 0.0;     // 0 derives max |signal|

    // power
    std::size_t count = 1;

    std::uint64_t seed = seed_fallback();
    std::string out, report;
};

json ist_result_json(const IstResult& r, bool objective) {
    json j;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["gamma"] = r.gamma;
    if (objective) j["objective_trace"] = r.objective_trace;
    return j;
}

json power_result_json(const PowerResult& r) {
    json j;
    j["values"] = r.values;
    j["iterations"] = r.iterations;
    return j;
}

int run_solve(const SolveArgs& a) {
    const ExecModel model = parse_model(a.model);
    const bool full = model == ExecModel::full;
    if (full && a.matrix.empty())
        throw InvalidArgumentError("solve --model full needs --matrix with the original data");
    if (!full && a.factors.empty())
        throw InvalidArgumentError("solve --model matrix|graph needs --factors");

    Factorization f;
    DenseMatrix mat;
    if (full)
        mat = load_matrix(a.matrix, format_for(a.matrix, a.fmt));
    else
        f = load_factorization(a.factors);

    DistConfig dcfg;
    dcfg.model = model;
    dcfg.n_workers = a.workers;
    dcfg.scheduler = a.scheduler == "threads" ? Scheduler::threads : Scheduler::sequential;

    json report;
    report["command"] = "solve";
    report["config"] = {{"algorithm", a.algorithm}, {"model", a.model},
                        {"workers", a.workers},     {"scheduler", a.scheduler},
                        {"seed", a.seed},           {"cached_gram", a.cached_gram}};
    report["gram_flow"] = full ? "full" : (a.cached_gram ? "cached" : "four_step");
    if (!full) {
        // Shape summary needs the data dimensions only for the density ratio;
        // report nnz against the coefficient grid instead.
        report["factorization"] = {{"l", f.l()},
                                   {"nnz_v", f.nnz()},
                                   {"achieved_delta", f.achieved_delta},
                                   {"delta_d", f.delta_d}};
    }

    CostContext ctx;
    Timer timer;
    json wall;

    if (a.algorithm == "fista") {
        if (a.signal.empty()) throw InvalidArgumentError("solve fista needs --signal");
        const Vector y = load_signal(a.signal, a.fmt);

        IstConfig icfg;
        icfg.lambda = a.lambda;
        icfg.gamma = 0.0;
        icfg.max_iters = a.iters;
        icfg.tol = a.tol;
        icfg.accelerate = !a.no_accel;
        icfg.track_objective = a.objective;
        icfg.seed = a.seed;
        double ysq = 0.0;
        for (double e : y) ysq += e * e;
        icfg.y_norm_sq = ysq;

        CostContext stop_ctx;
        double psnr_ceiling = a.psnr_max;
        if (a.target_psnr > 0.0) {
            if (psnr_ceiling <= 0.0)
                for (double e : y) psnr_ceiling = std::max(psnr_ceiling, std::abs(e));
            if (!(psnr_ceiling > 0.0))
                throw InvalidArgumentError("solve fista: zero signal; supply --psnr-max");
            if (full) {
                const DenseMatrix* ap = &mat;
                const Vector ref = y;
                const double ceiling = psnr_ceiling;
                const double target = a.target_psnr;
                icfg.stop_check = [ap, ref, ceiling, target](const Vector& x, std::size_t) {
                    return psnr(ref, dense_matvec(*ap, x, false), ceiling) >= target;
                };
            } else {
                icfg.stop_check =
                    make_psnr_stop(f.d, f.v, y, psnr_ceiling, a.target_psnr, stop_ctx);
            }
        }

        IstResult res;
        std::uint64_t mem = 0;
        Vector recon;
        if (full) {
            const GramOperator g = GramOperator::full(mat);
            const Vector b = g.correlate(y, ctx);
            res = ist_solve(g, b, icfg, ctx);
            mem = g.memory_entries();
            recon = dense_matvec(mat, res.x, false);
        } else if (a.workers <= 1 && dcfg.model == ExecModel::matrix && a.cached_gram) {
            CostContext build_ctx;
            const GramOperator g = GramOperator::factored_cached(f.d, f.v, build_ctx);
            const Vector b = g.correlate(y, ctx);
            res = ist_solve(g, b, icfg, ctx);
            mem = g.memory_entries();
            CostContext rctx;
            recon = reconstruct(f.d, f.v, res.x, rctx);
        } else {
            if (a.cached_gram)
                throw InvalidArgumentError(
                    "solve fista: --cached-gram applies to the serial matrix model only");
            const DistExec exec(f.d, f.v, dcfg);
            const Vector b = exec.correlate(y, ctx);
            res = ist_solve_exec(exec, b, icfg, ctx);
            mem = exec.memory_entries();
            CostContext rctx;
            recon = reconstruct(f.d, f.v, res.x, rctx);
        }
        wall["solve"] = timer.seconds();

        double maxv = a.psnr_max;
        if (maxv <= 0.0)
            for (double e : y) maxv = std::max(maxv, std::abs(e));
        report["result"] = ist_result_json(res, a.objective);
        report["memory_entries"] = mem;
        if (maxv > 0.0) report["metrics"] = {{"psnr_db", json_double(psnr(y, recon, maxv))}};

        if (!a.out.empty()) save_signal(res.x, a.out, a.fmt);
    } else {
        PowerConfig pcfg;
        pcfg.count = a.count;
        pcfg.max_iters = a.iters;
        pcfg.tol = a.tol;
        pcfg.seed = a.seed;

        PowerResult res;
        std::uint64_t mem = 0;
        if (full) {
            const GramOperator g = GramOperator::full(mat);
            res = power_eigs(g, pcfg, ctx);
            mem = g.memory_entries();
        } else if (a.workers <= 1 && dcfg.model == ExecModel::matrix && a.cached_gram) {
            CostContext build_ctx;
            const GramOperator g = GramOperator::factored_cached(f.d, f.v, build_ctx);
            res = power_eigs(g, pcfg, ctx);
            mem = g.memory_entries();
        } else {
            if (a.cached_gram)
                throw InvalidArgumentError(
                    "solve power: --cached-gram applies to the serial matrix model only");
            res = run_distributed_power(f.d, f.v, pcfg, dcfg, ctx);
            mem = DistExec(f.d, f.v, dcfg).memory_entries();
        }
        wall["solve"] = timer.seconds();
        report["result"] = power_result_json(res);
        report["memory_entries"] = mem;
        if (!a.out.empty()) write_text(a.out, power_result_json(res).dump(2) + "\n");
    }

    report["cost"] = counters_json(ctx.counters());
    write_report(report, a.report, wall);
    std::cout << report["result"].dump(2) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// tune
// --------------------------------------------------------------------------

struct TuneArgs {
    std::string input, fmt = "auto";
    double target_dl = 0.0;
    std::string eval = "power";
    std::size_t count = 10;
    std::size_t probes = 10;
    bool parallel = false;
    double delta_d_max = 0.4, delta_d_min = 1e-3;
    std::size_t max_rounds = 32;
    double lambda = 0.1;
    std::size_t workers = 1;
    std::uint64_t seed = seed_fallback();
    std::string out_prefix, report;
};

int run_tune(const TuneArgs& a) {
    const DenseMatrix mat = load_matrix(a.input, format_for(a.input, a.fmt));

    TuneConfig cfg;
    cfg.delta_d_max = a.delta_d_max;
    cfg.delta_d_min = a.delta_d_min;
    cfg.target_delta_l = a.target_dl;
    cfg.max_rounds = a.max_rounds;
    cfg.parallel = a.parallel;
    cfg.decompose.seed = a.seed;
    cfg.decompose.workers = a.workers;

    CostContext eval_ctx;
    if (a.eval == "power") {
        PowerConfig base;
        base.seed = a.seed;
        cfg.evaluate = make_power_eval(mat, a.count, base, eval_ctx);
    } else {
        IstConfig base;
        base.lambda = a.lambda;
        base.seed = a.seed;
        cfg.evaluate = make_fista_eval(mat, a.probes, base, a.seed, a.workers, eval_ctx);
    }

    Timer timer;
    CostContext ctx;
    const TuneResult res = tune(mat, cfg, ctx);
    const double wall = timer.seconds();
    if (!a.out_prefix.empty()) save_factorization(res.factorization, a.out_prefix, a.seed);

    json rounds = json::array();
    for (const TuneRound& r : res.trace)
        rounds.push_back({{"delta_d", r.delta_d},
                          {"delta_l", r.delta_l},
                          {"selected", r.selected},
                          {"nnz", r.nnz}});
    json report;
    report["command"] = "tune";
    report["config"] = {{"input", a.input},
                        {"target_delta_l", a.target_dl},
                        {"eval", a.eval},
                        {"count", a.count},
                        {"probes", a.probes},
                        {"parallel", a.parallel},
                        {"delta_d_max", a.delta_d_max},
                        {"delta_d_min", a.delta_d_min},
                        {"max_rounds", a.max_rounds},
                        {"workers", a.workers},
                        {"seed", a.seed}};
    report["chosen_delta_d"] = res.delta_d;
    report["factorization"] = factor_summary(mat, res.factorization);
    report["trace"] = rounds;
    report["cost"] = counters_json(ctx.counters());
    write_report(report, a.report, json{{"tune", wall}});

    std::cout << "chosen delta_d=" << fmt_double(res.delta_d) << " after " << res.trace.size()
              << " rounds, l=" << res.factorization.l() << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// bench
// --------------------------------------------------------------------------

struct BenchSweepArgs {
    std::string input, fmt = "auto";
    std::vector<double> deltas = {0.4, 0.2, 0.1, 0.05, 0.001};
    std::size_t count = 10;
    std::size_t workers = 1;
    std::uint64_t seed = seed_fallback();
    std::string out, report;
};

int run_bench_sweep(const BenchSweepArgs& a) {
    const DenseMatrix mat = load_matrix(a.input, format_for(a.input, a.fmt));
    CostContext oracle_ctx;
    PowerConfig base;
    base.seed = a.seed;
    const auto delta_l_of = make_power_eval(mat, a.count, base, oracle_ctx);

    std::string csv = "delta_d,metric,value\n";
    json rows = json::array();
    json wall;
    const double denom = static_cast<double>(mat.rows()) * static_cast<double>(mat.cols());
    for (const double dd : a.deltas) {
        CssdConfig cfg;
        cfg.delta_d = dd;
        cfg.workers = a.workers;
        cfg.seed = a.seed;
        Timer timer;
        CostContext ctx;
        const Factorization f = decompose(mat, cfg, ctx);
        wall["decompose_" + fmt_double(dd)] = timer.seconds();
        const double dl = delta_l_of(f);

        const auto& c = ctx.counters();
        const std::map<std::string, double> metrics = {
            {"l", static_cast<double>(f.l())},
            {"nnz_v", static_cast<double>(f.nnz())},
            {"density_ratio", static_cast<double>(f.nnz()) / denom},
            {"achieved_delta", f.achieved_delta},
            {"delta_l", dl},
            {"multiplications", static_cast<double>(c.multiplications)},
            {"additions", static_cast<double>(c.additions)}};
        for (const auto& [name, value] : metrics)
            csv += fmt_double(dd) + "," + name + "," + fmt_double(value) + "\n";
        json row = factor_summary(mat, f);
        row["delta_l"] = dl;
        row["cost"] = counters_json(c);
        rows.push_back(row);
    }
    write_text(a.out, csv);
    write_timing_sidecar(a.out, wall);

    if (!a.report.empty()) {
        json report;
        report["command"] = "bench sweep";
        report["config"] = {{"input", a.input}, {"deltas", a.deltas},
                            {"count", a.count}, {"workers", a.workers},
                            {"seed", a.seed}};
        report["rows"] = rows;
        write_report(report, a.report, wall);
    }
    std::cout << "wrote " << a.out << " (" << a.deltas.size() << " tolerance levels)\n";
    return 0;
}

struct BenchModelsArgs {
    std::string input, fmt = "auto";
    double delta_d = 0.1;
    std::size_t workers = 4;
    std::size_t iters = 20;
    double lambda = 0.05;
    std::uint64_t seed = seed_fallback();
    std::string out, report;
};

// Same fixed FISTA workload on every execution model; counters land in one
// CSV row per model.
int run_bench_models(const BenchModelsArgs& a) {
    const DenseMatrix mat = load_matrix(a.input, format_for(a.input, a.fmt));
    CssdConfig ccfg;
    ccfg.delta_d = a.delta_d;
    ccfg.workers = a.workers;
    ccfg.seed = a.seed;
    CostContext dctx;
    const Factorization f = decompose(mat, ccfg, dctx);

    Rng rng(a.seed + 1);
    Vector y(mat.rows());
    for (double& e : y) e = rng.gaussian();

    IstConfig icfg;
    icfg.lambda = a.lambda;
    icfg.max_iters = a.iters;
    icfg.tol = 0.0;  // run the full budget so rows stay comparable
    icfg.track_objective = false;
    icfg.seed = a.seed;

    struct Row {
        std::string model;
        std::size_t n_c;
        CostCounters counters;
        std::uint64_t memory;
        double wall;
    };
    std::vector<Row> table;

    {
        Timer timer;
        CostContext ctx;
        const GramOperator g = GramOperator::full(mat);
        const Vector b = g.correlate(y, ctx);
        (void)ist_solve(g, b, icfg, ctx);
        table.push_back({"full", 1, ctx.counters(), g.memory_entries(), timer.seconds()});
    }
    for (const ExecModel model : {ExecModel::matrix, ExecModel::graph}) {
        DistConfig dcfg;
        dcfg.model = model;
        dcfg.n_workers = a.workers;
        Timer timer;
        CostContext ctx;
        const DistExec exec(f.d, f.v, dcfg);
        const Vector b = exec.correlate(y, ctx);
        (void)ist_solve_exec(exec, b, icfg, ctx);
        table.push_back(
            {to_string(model), a.workers, ctx.counters(), exec.memory_entries(), timer.seconds()});
    }

    std::string csv = "model,n_c,multiplications,additions,communicated_values,memory_entries\n";
    json wall;
    for (const Row& r : table) {
        csv += r.model + "," + std::to_string(r.n_c) + "," +
               std::to_string(r.counters.multiplications) + "," +
               std::to_string(r.counters.additions) + "," +
               std::to_string(r.counters.communicated_values) + "," +
               std::to_string(r.memory) + "\n";
        wall["solve_" + r.model] = r.wall;
    }
    write_text(a.out, csv);
    write_timing_sidecar(a.out, wall);

    if (!a.report.empty()) {
        json report;
        report["command"] = "bench models";
        report["config"] = {{"input", a.input},   {"delta_d", a.delta_d},
                            {"workers", a.workers}, {"iters", a.iters},
                            {"lambda", a.lambda},   {"seed", a.seed}};
        report["factorization"] = factor_summary(mat, f);
        json rows = json::array();
        for (const Row& r : table) {
            json row = counters_json(r.counters);
            row["model"] = r.model;
            row["n_c"] = r.n_c;
            row["memory_entries"] = r.memory;
            rows.push_back(row);
        }
        report["rows"] = rows;
        write_report(report, a.report, wall);
    }
    std::cout << "wrote " << a.out << " (" << table.size() << " models)\n";
    return 0;
}

struct BenchMemoryArgs {
    std::string input, fmt = "auto";
    double delta_d = 0.1;
    std::size_t workers = 1;
    std::uint64_t seed = seed_fallback();
    std::string out, report;
};

// Entry-count comparison of the raw data against two variants sharing the
// same dictionary: sparse coefficients versus dense least-squares
// coefficients. The dense variant is actually solved so its reconstruction
// error is reported next to the counts.
int run_bench_memory(const BenchMemoryArgs& a) {
    const DenseMatrix mat = load_matrix(a.input, format_for(a.input, a.fmt));
    CssdConfig ccfg;
    ccfg.delta_d = a.delta_d;
    ccfg.workers = a.workers;
    ccfg.seed = a.seed;
    Timer timer;
    CostContext ctx;
    const Factorization f = decompose(mat, ccfg, ctx);
    const MemoryTable t = memory_table(mat, f);

    // Dense least-squares coefficients on the same dictionary, solved for
    // real so both reconstruction errors appear next to the counts.
    const std::size_t m = mat.rows(), n = mat.cols();
    const ColPivQr qr(f.d, ctx);
    const auto& cp = f.v.col_ptr();
    const auto& ri = f.v.row_idx();
    const auto& vs = f.v.values();
    double ls_err_sq = 0.0, omp_err_sq = 0.0, a_sq = 0.0;
    Vector col(m);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) col[i] = mat(i, j);
        for (double e : col) a_sq += e * e;

        const Vector c = qr.solve(col, ctx);
        Vector r = col;
        for (std::size_t k = 0; k < f.d.cols(); ++k) {
            const double ck = c[k];
            if (ck == 0.0) continue;
            const double* dk = f.d.col(k);
            for (std::size_t i = 0; i < m; ++i) r[i] -= ck * dk[i];
        }
        for (double e : r) ls_err_sq += e * e;

        Vector r2 = col;
        for (std::size_t t2 = cp[j]; t2 < cp[j + 1]; ++t2) {
            const double w = vs[t2];
            const double* dk = f.d.col(ri[t2]);
            for (std::size_t i = 0; i < m; ++i) r2[i] -= w * dk[i];
        }
        for (double e : r2) omp_err_sq += e * e;
    }
    const double wall = timer.seconds();
    if (a_sq <= 0.0) throw DegenerateInputError("bench memory: input is all zero");
    const double ls_rel = std::sqrt(ls_err_sq / a_sq);
    const double omp_rel = std::sqrt(omp_err_sq / a_sq);

    std::string csv = "representation,entry_count,ratio\n";
    csv += "original," + std::to_string(t.original) + ",1\n";
    csv += "least_squares," + std::to_string(t.least_squares) + "," +
           fmt_double(t.least_squares_ratio) + "\n";
    csv += "rankmap," + std::to_string(t.rankmap) + "," + fmt_double(t.rankmap_ratio) + "\n";
    csv += "rankmap_with_index," + std::to_string(t.rankmap_with_index) + "," +
           fmt_double(static_cast<double>(t.rankmap_with_index) /
                      static_cast<double>(t.original)) +
           "\n";
    write_text(a.out, csv);
    write_timing_sidecar(a.out, json{{"bench_memory", wall}});

    if (!a.report.empty()) {
        json report;
        report["command"] = "bench memory";
        report["config"] = {{"input", a.input},
                            {"delta_d", a.delta_d},
                            {"workers", a.workers},
                            {"seed", a.seed}};
        report["factorization"] = factor_summary(mat, f);
        report["table"] = {{"original", t.original},
                           {"least_squares", t.least_squares},
                           {"rankmap", t.rankmap},
                           {"rankmap_with_index", t.rankmap_with_index},
                           {"least_squares_ratio", t.least_squares_ratio},
                           {"rankmap_ratio", t.rankmap_ratio},
                           {"beneficial", t.beneficial}};
        report["errors"] = {{"least_squares_rel", ls_rel}, {"rankmap_rel", omp_rel}};
        write_report(report, a.report, json{{"bench_memory", wall}});
    }
    std::cout << "wrote " << a.out << (t.beneficial ? " (rankmap beneficial)\n"
                                                    : " (rankmap NOT beneficial)\n");
    return 0;
}

// --------------------------------------------------------------------------
// wiring
// --------------------------------------------------------------------------

void add_format_opt(CLI::App* cmd, std::string& fmt) {
    cmd->add_option("--format", fmt, "file format: auto (by extension), raw, mtx")
        ->check(CLI::IsMember({"auto", "raw", "mtx"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-rank sparse factorization toolkit"};
    app.require_subcommand(1);

    try {
        // Reading RANKMAP_SEED happens in the struct initializers below; a
        // malformed value throws before parsing begins.
        GenArgs gen;
        DecomposeArgs dec;
        SolveArgs sol;
        TuneArgs tun;
        BenchSweepArgs bsw;
        BenchModelsArgs bmo;
        BenchMemoryArgs bme;

        auto* g = app.add_subcommand("gen", "generate a synthetic dataset");
        g->add_option("--kind", gen.kind, "dataset family")
            ->check(CLI::IsMember({"low_rank", "union_of_subspaces", "block_diagonal_v"}));
        g->add_option("--m", gen.m, "rows")->required();
        g->add_option("--n", gen.n, "columns")->required();
        g->add_option("--rank", gen.rank, "rank, or per-subspace dimension")->required();
        g->add_option("--subspaces", gen.subspaces, "subspace count K");
        g->add_option("--noise", gen.noise, "additive Gaussian noise level");
        g->add_option("--seed", gen.seed, "RNG seed (default: RANKMAP_SEED or 0)");
        g->add_option("-o,--out", gen.out, "output matrix file")->required();
        add_format_opt(g, gen.fmt);

        auto* d = app.add_subcommand("decompose", "factor a matrix into D and sparse V");
        d->add_option("input", dec.input, "matrix file")->required();
        d->add_option("--delta-d", dec.delta_d, "per-column residual tolerance");
        d->add_option("--max-cols", dec.max_cols, "selection cap (0 = auto)");
        d->add_option("--batch", dec.batch, "columns sampled per round (0 = auto)");
        d->add_option("--max-atoms", dec.max_atoms, "sparse-coding cap per column (0 = auto)");
        d->add_option("--workers", dec.workers, "threads for per-column passes");
        d->add_option("--seed", dec.seed, "RNG seed (default: RANKMAP_SEED or 0)");
        d->add_option("-o,--out", dec.out_prefix, "factor file prefix");
        d->add_option("--report", dec.report, "JSON report path");
        add_format_opt(d, dec.fmt);

        auto* s = app.add_subcommand("solve", "run a solver on the factored operator");
        s->add_option("algorithm", sol.algorithm, "fista or power")
            ->required()
            ->check(CLI::IsMember({"fista", "power"}));
        s->add_option("--factors", sol.factors, "factor file prefix from decompose");
        s->add_option("--matrix", sol.matrix, "original matrix (for --model full)");
        s->add_option("--model", sol.model, "execution model")
            ->check(CLI::IsMember({"matrix", "graph", "full"}));
        s->add_flag("--full", [&sol](std::int64_t) { sol.model = "full"; },
                    "shorthand for --model full");
        s->add_option("--workers", sol.workers, "simulated worker count");
        s->add_option("--scheduler", sol.scheduler, "worker scheduling")
            ->check(CLI::IsMember({"sequential", "threads"}));
        s->add_flag("--cached-gram", sol.cached_gram,
                    "serial matrix model: precompute the dictionary Gram");
        s->add_option("--signal", sol.signal, "observation vector file (fista)");
        s->add_option("--lambda", sol.lambda, "l1 weight (fista)");
        s->add_option("--tol", sol.tol, "convergence tolerance");
        s->add_option("--iters", sol.iters, "iteration budget");
        s->add_flag("--no-accel", sol.no_accel, "plain IST instead of FISTA");
        s->add_flag("--objective", sol.objective, "track the objective trace");
        s->add_option("--target-psnr", sol.target_psnr,
                      "stop once the reconstruction reaches this PSNR (dB)");
        s->add_option("--psnr-max", sol.psnr_max, "PSNR peak value (0 = max |signal|)");
        s->add_option("--count", sol.count, "eigenpairs to extract (power)");
        s->add_option("--seed", sol.seed, "RNG seed (default: RANKMAP_SEED or 0)");
        s->add_option("-o,--out", sol.out, "solution output file");
        s->add_option("--report", sol.report, "JSON report path");
        add_format_opt(s, sol.fmt);

        auto* t = app.add_subcommand("tune", "search the dictionary tolerance for a target accuracy");
        t->add_option("input", tun.input, "matrix file")->required();
        t->add_option("--target-dl", tun.target_dl, "target learning error")->required();
        t->add_option("--eval", tun.eval, "accuracy probe")
            ->check(CLI::IsMember({"power", "fista"}));
        t->add_option("--count", tun.count, "eigenvalues compared (power eval)");
        t->add_option("--probes", tun.probes, "held-out signals (fista eval)");
        t->add_flag("--parallel", tun.parallel, "evaluate the whole tolerance ladder concurrently");
        t->add_option("--delta-d-max", tun.delta_d_max, "ladder start");
        t->add_option("--delta-d-min", tun.delta_d_min, "ladder floor");
        t->add_option("--max-rounds", tun.max_rounds, "halving budget");
        t->add_option("--lambda", tun.lambda, "l1 weight (fista eval)");
        t->add_option("--workers", tun.workers, "threads");
        t->add_option("--seed", tun.seed, "RNG seed (default: RANKMAP_SEED or 0)");
        t->add_option("-o,--out", tun.out_prefix, "factor file prefix for the chosen tolerance");
        t->add_option("--report", tun.report, "JSON report path");
        add_format_opt(t, tun.fmt);

        auto* b = app.add_subcommand("bench", "benchmark tables");
        b->require_subcommand(1);

        auto* sw = b->add_subcommand("sweep", "decomposition metrics across a tolerance ladder");
        sw->add_option("input", bsw.input, "matrix file")->required();
        sw->add_option("--deltas", bsw.deltas, "tolerance levels")->delimiter(',');
        sw->add_option("--count", bsw.count, "eigenvalues for the learning-error column");
        sw->add_option("--workers", bsw.workers, "threads");
        sw->add_option("--seed", bsw.seed, "RNG seed (default: RANKMAP_SEED or 0)");
        sw->add_option("-o,--out", bsw.out, "CSV output path")->required();
        sw->add_option("--report", bsw.report, "JSON report path");
        add_format_opt(sw, bsw.fmt);

        auto* mo = b->add_subcommand("models", "cost counters per execution model");
        mo->add_option("input", bmo.input, "matrix file")->required();
        mo->add_option("--delta-d", bmo.delta_d, "decomposition tolerance");
        mo->add_option("--workers", bmo.workers, "simulated worker count");
        mo->add_option("--iters", bmo.iters, "fixed FISTA iteration budget");
        mo->add_option("--lambda", bmo.lambda, "l1 weight");
        mo->add_option("--seed", bmo.seed, "RNG seed (default: RANKMAP_SEED or 0)");
        mo->add_option("-o,--out", bmo.out, "CSV output path")->required();
        mo->add_option("--report", bmo.report, "JSON report path");
        add_format_opt(mo, bmo.fmt);

        auto* me = b->add_subcommand("memory", "entry-count table against a dense-coefficient variant");
        me->add_option("input", bme.input, "matrix file")->required();
        me->add_option("--delta-d", bme.delta_d, "decomposition tolerance");
        me->add_option("--workers", bme.workers, "threads");
        me->add_option("--seed", bme.seed, "RNG seed (default: RANKMAP_SEED or 0)");
        me->add_option("-o,--out", bme.out, "CSV output path")->required();
        me->add_option("--report", bme.report, "JSON report path");
        add_format_opt(me, bme.fmt);

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 1;
        }

        if (*g) return run_gen(gen);
        if (*d) return run_decompose(dec);
        if (*s) return run_solve(sol);
        if (*t) return run_tune(tun);
        if (*sw) return run_bench_sweep(bsw);
        if (*mo) return run_bench_models(bmo);
        if (*me) return run_bench_memory(bme);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
