#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace precess {

// Worker count: explicit request wins, then the PRECESS_THREADS environment
// variable, then 1.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PRECESS_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

// Runs fn(i) for i in [0, n_items) across n_threads workers pulling from a
// shared counter. Serial when one worker. The first exception wins and is
// rethrown after all workers join.
template <typename Fn>
void parallel_for(int n_threads, int64_t n_items, Fn&& fn) {
    if (n_items <= 0) return;
    if (n_threads <= 1 || n_items == 1) {
        for (int64_t i = 0; i < n_items; ++i) fn(i);
        return;
    }
    std::atomic<int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mtx;
    auto work = [&] {
        for (;;) {
            int64_t i = next.fetch_add(1);
            if (i >= n_items || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mtx);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int nw = int(std::min<int64_t>(n_threads, n_items));
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace precess
