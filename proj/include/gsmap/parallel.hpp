#pragma once

// Static-partition parallel loop. Work item i always lands in the same chunk
// for a given worker count, and reductions over per-chunk buffers happen in
// chunk order, so results are bit-identical across runs with the same config.

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace gsmap {

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(std::min(hw, 16u)) : 1;
}

// fn(begin, end, slot) runs on items [begin, end); slot is the chunk index.
template <typename Fn>
void parallel_chunks(size_t n, int workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (n == 0) return;
    size_t chunks = std::min<size_t>(workers, n);
    if (chunks <= 1) {
        fn(size_t(0), n, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (size_t s = 0; s < chunks; ++s) {
        size_t begin = n * s / chunks;
        size_t end = n * (s + 1) / chunks;
        pool.emplace_back([&fn, begin, end, s] { fn(begin, end, s); });
    }
    for (auto& t : pool) t.join();
}

} // namespace gsmap
