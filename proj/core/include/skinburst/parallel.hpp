#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace skinburst {

/// Worker count: `requested` if nonzero, else SKINBURST_THREADS if set and
/// nonzero, else hardware concurrency. Never less than 1.
unsigned worker_count(unsigned requested = 0);

/// Calls body(i) for i in [0, count) on up to `workers` threads. Each index
/// runs exactly once; callers write results into slot i, so the output does
/// not depend on scheduling. The first exception is rethrown after all
/// workers finish.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
    if (count == 0) return;
    const std::size_t n_threads = std::min<std::size_t>(count, workers == 0 ? 1 : workers);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads - 1);
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace skinburst
