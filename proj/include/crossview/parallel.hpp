#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace crossview {

/// Resolves a requested worker count: 0 means hardware concurrency.
int resolve_threads(int requested);

/// Runs fn(begin, end, slot) over [0, n) split into contiguous chunks, one per
/// worker slot. Callers must only use this for kernels whose result does not
/// depend on chunk boundaries (independent writes, or reductions over a
/// commutative-associative lattice such as lexicographic min).
template <typename Fn>
void parallel_chunks(std::size_t n, int threads, Fn&& fn) {
    int workers = resolve_threads(threads);
    if (n == 0) return;
    if (workers <= 1 || n < 2048) {
        fn(std::size_t{0}, n, 0);
        return;
    }
    if (static_cast<std::size_t>(workers) > n) workers = static_cast<int>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::size_t chunk = (n + workers - 1) / workers;
    for (int w = 1; w < workers; ++w) {
        std::size_t begin = chunk * w;
        std::size_t end = begin + chunk < n ? begin + chunk : n;
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
    }
    fn(std::size_t{0}, chunk < n ? chunk : n, 0);
    for (auto& t : pool) t.join();
}

}  // namespace crossview
