#pragma once

#include <cstdint>
#include <string>

namespace rankmap {

// Operation totals for one run. Multiplications and additions count scalar
// floating-point operations; communicated_values counts payload reals moving
// between simulated workers (headers and message framing excluded);
// memory_entries counts resident reals plus stored sparse indices under the
// convention each report declares.
struct CostCounters {
    std::uint64_t multiplications = 0;
    std::uint64_t additions = 0;
    std::uint64_t communicated_values = 0;
    std::uint64_t memory_entries = 0;

    CostCounters& operator+=(const CostCounters& o) {
        multiplications += o.multiplications;
        additions += o.additions;
        communicated_values += o.communicated_values;
        memory_entries += o.memory_entries;
        return *this;
    }
};

// Accounting context threaded explicitly through kernels. There is no global
// counter state: every caller owns its context, which keeps concurrent runs
// independent and totals deterministic.
class CostContext {
public:
    void count_mults(std::uint64_t n) { c_.multiplications += n; }
    void count_adds(std::uint64_t n) { c_.additions += n; }
    void count_comm(std::uint64_t n) { c_.communicated_values += n; }
    void count_memory(std::uint64_t n) { c_.memory_entries += n; }

    void merge(const CostContext& o) { c_ += o.c_; }
    void reset() { c_ = CostCounters{}; }

    const CostCounters& counters() const { return c_; }

private:
    CostCounters c_;
};

// One accounting row as emitted by reports: which execution model produced
// the counters, at what worker count, plus the factorization shape the
// formulas depend on. Wall time lives here rather than in CostCounters so the
// deterministic counter block stays byte-stable across runs.
struct CostReport {
    std::string model;  // "full", "matrix", or "graph"
    std::size_t n_c = 1;
    std::size_t l = 0;
    std::uint64_t nnz_v = 0;
    CostCounters counters;
    double wall_time_s = 0.0;
};

}  // namespace rankmap
