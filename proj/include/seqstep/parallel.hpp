#ifndef SEQSTEP_PARALLEL_HPP
#define SEQSTEP_PARALLEL_HPP

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace seqstep {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Work is strided across threads; results must be
// written to caller-owned slots indexed by i so the outcome is independent of
// scheduling. The first exception thrown by any worker is rethrown.
inline void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
    const int t = std::min<long>(resolve_threads(threads), std::max(1L, n));
    if (t <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (long i = w; i < n; i += t) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace seqstep

#endif
