#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace pilotidx::detail {

// Static block partition; each block writes disjoint output so results do not
// depend on the thread count.
template <class F>
void parallel_for(long n, int threads, F&& f) {
    threads = static_cast<int>(std::max(1L, std::min<long>(threads, n)));
    if (threads == 1) {
        f(0L, n);
        return;
    }
    std::vector<std::thread> pool;
    const long chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        long lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&f, lo, hi] { f(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace pilotidx::detail
