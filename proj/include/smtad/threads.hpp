#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace smtad {

// Worker cap: SMTAD_THREADS when set, hardware concurrency otherwise.
inline int worker_cap() {
    if (const char* env = std::getenv("SMTAD_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

inline int resolve_threads(int requested) {
    const int cap = worker_cap();
    if (requested <= 0) return cap;
    return requested < cap ? requested : cap;
}

// Runs fn(i) for i in [0, n). Each index must write only to its own output
// slot; with that discipline the result is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int n_threads, Fn&& fn) {
    n_threads = resolve_threads(n_threads);
    if (n_threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t spawn = static_cast<std::size_t>(n_threads) < n ? n_threads : n;
    pool.reserve(spawn);
    for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace smtad
