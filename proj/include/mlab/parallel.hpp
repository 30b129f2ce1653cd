#pragma once

// Deterministic chunked parallel map. Results land in index order and the
// exception from the lowest failing index wins, so outcomes do not depend
// on the thread count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mlab {

/// Thread count from MLAB_THREADS, else the hardware concurrency.
unsigned thread_count();

template <class T, class F>
std::vector<T> parallel_map(std::size_t count, F&& fn, unsigned threads = thread_count()) {
    std::vector<T> out(count);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(count, lo + chunk);
            for (std::size_t i = lo; i < hi; ++i) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (unsigned w = 0; w < threads; ++w)
        if (errors[w]) std::rethrow_exception(errors[w]);  // chunks are ordered
    return out;
}

}  // namespace mlab
