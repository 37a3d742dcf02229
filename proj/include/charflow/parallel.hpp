#pragma once

// Deterministic line-parallel helper. Work is split into contiguous index
// ranges; every range writes disjoint output locations and reads only inputs
// frozen before the call, so results are bitwise identical for any thread
// count (including 1, which runs inline).

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace charflow {

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (n <= 0) return;
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(threads));
    const int chunk = (n + threads - 1) / threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, err = &errors[std::size_t(t)]] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                *err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    // Rethrow the failure of the lowest chunk so the surfaced error does not
    // depend on thread scheduling.
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace charflow
