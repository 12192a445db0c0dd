#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace walsh {

// Worker count resolution: the WALSH_SIM_THREADS environment variable wins,
// then the requested count; 0 means hardware concurrency.
unsigned resolve_workers(unsigned requested);

// Runs fn(path_index) for every index in [0, n_paths), in parallel, storing
// results by index. Workers pull indices from a shared counter, so the
// result vector is identical for any worker count. The first exception
// thrown by any worker is rethrown after all workers join.
template <class R, class Fn>
std::vector<R> run_batch(std::size_t n_paths, unsigned workers, Fn&& fn) {
    std::vector<R> results(n_paths);
    workers = resolve_workers(workers);
    if (workers <= 1 || n_paths <= 1) {
        for (std::size_t i = 0; i < n_paths; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_paths || failed.load(std::memory_order_relaxed)) break;
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                break;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return results;
}

}  // namespace walsh
