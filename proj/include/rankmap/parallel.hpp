#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace rankmap {

// Runs fn(begin, end, slot) over a static split of [0, total) across up to
// `workers` threads. The split depends only on (total, workers), and each slot
// writes disjoint output, so results are identical for any worker count;
// callers merge per-slot accounting in ascending slot order.
template <typename Fn>
void parallel_ranges(std::size_t total, std::size_t workers, Fn&& fn) {
    if (workers == 0) workers = 1;
    if (workers > total) workers = total == 0 ? 1 : total;
    if (workers <= 1) {
        fn(std::size_t{0}, total, std::size_t{0});
        return;
    }
    const std::size_t base = total / workers;
    const std::size_t rem = total % workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t len = base + (w < rem ? 1 : 0);
        const std::size_t end = begin + len;
        threads.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
        begin = end;
    }
    for (auto& t : threads) t.join();
}

}  // namespace rankmap
