#pragma once
/// @file parallel.hpp
/// @brief Static-partition thread pool helpers; MSA_THREADS caps the worker count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace msa {

/// Worker count: the override if set, else MSA_THREADS, else the hardware count.
int thread_count();
/// Process-wide override; 0 restores the environment default.
void set_thread_count(int n);

/// Calls fn(begin, end) on contiguous chunks. Chunk boundaries depend only on n and the
/// worker count, and every index is handled by exactly one call, so per-index results are
/// identical for any thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    int T = std::max(1, std::min<int>(thread_count(), static_cast<int>(std::min<std::size_t>(n, 1u << 20))));
    if (T <= 1 || n < 2) {
        if (n) fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(T);
    std::size_t chunk = (n + T - 1) / T;
    for (int w = 0; w < T; ++w) {
        std::size_t b = w * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, w, b, e] {
            try {
                fn(b, e);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace msa
