#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace snakewalk {

/// Number of worker threads used by parallel_for. Zero means hardware concurrency.
inline std::size_t& worker_count() {
    static std::size_t count = 0;
    return count;
}

/// Runs body(begin, end) over a fixed partition of [0, total).
///
/// The partition depends only on `total` and the worker count, never on
/// scheduling, so callers that reduce per-chunk results in chunk order get
/// bit-identical output from run to run.
inline void parallel_for(std::size_t total,
                         const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end)>& body,
                         std::size_t chunks = 0) {
    if (total == 0) return;
    std::size_t workers = worker_count();
    if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (chunks == 0) chunks = workers;
    chunks = std::min(chunks, total);
    auto bounds = [&](std::size_t c) { return c * total / chunks; };
    if (workers == 1 || chunks == 1) {
        for (std::size_t c = 0; c < chunks; ++c) body(c, bounds(c), bounds(c + 1));
        return;
    }
    std::vector<std::exception_ptr> errors(chunks);
    std::vector<std::thread> pool;
    const std::size_t threads = std::min(workers, chunks);
    pool.reserve(threads);
    // Static round-robin assignment of chunks to threads.
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < chunks; c += threads) {
                try {
                    body(c, bounds(c), bounds(c + 1));
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Maps f over [0, n) in parallel; results are stored by index.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
    std::vector<T> out(n);
    parallel_for(n, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = f(i);
    });
    return out;
}

}  // namespace snakewalk
