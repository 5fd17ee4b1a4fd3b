#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace conceptguard {

// Static-partition parallel loop. Each index writes to its own output slot,
// so results do not depend on the worker count; workers <= 0 picks the
// hardware concurrency.
template <class Fn>
void parallel_for(size_t n, int workers, Fn&& fn) {
    if (workers <= 0)
        workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1)
        workers = 1;
    size_t w = std::min<size_t>(static_cast<size_t>(workers), n);
    if (w <= 1) {
        for (size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (size_t t = 0; t < w; ++t) {
        threads.emplace_back([=, &fn] {
            for (size_t i = t; i < n; i += w)
                fn(i);
        });
    }
    for (std::thread& th : threads)
        th.join();
}

} // namespace conceptguard
