#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace simrel {

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
///
/// Work is partitioned by contiguous index blocks decided up front, so the
/// set of indices each worker handles is independent of scheduling.  Callers
/// write results into per-index slots and reduce sequentially afterwards,
/// which keeps all outputs byte-identical across thread counts.
template <typename Fn>
void parallel_for_static(std::size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    const int workers =
        std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t b = std::min(n, static_cast<std::size_t>(w) * chunk);
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] {
            for (std::size_t i = b; i < e; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace simrel
