#pragma once

#include "greg/types.hpp"

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace greg {

// Column-chunk size shared by every blocked reduction and batched matrix
// kernel. The chunk grid is a function of the data size only, never of the
// worker count, so results are bit-identical no matter how work is scheduled.
inline constexpr Index kChunkCols = 4096;

inline Index chunk_count(Index total) {
    return total <= 0 ? 0 : (total + kChunkCols - 1) / kChunkCols;
}

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Calls fn(chunk, begin, end) for every fixed chunk of [0, total).
// fn must only touch chunk-owned state; combination across chunks is the
// caller's job and must run in chunk-index order.
template <typename Fn>
void for_each_chunk(Index total, int workers, Fn&& fn) {
    const Index nchunks = chunk_count(total);
    if (nchunks == 0) return;

    const int nthreads = std::clamp<int>(resolve_workers(workers),
                                         1, static_cast<int>(nchunks));
    if (nthreads == 1) {
        for (Index c = 0; c < nchunks; ++c) {
            const Index begin = c * kChunkCols;
            fn(c, begin, std::min(begin + kChunkCols, total));
        }
        return;
    }

    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (Index c = t; c < nchunks; c += nthreads) {
                const Index begin = c * kChunkCols;
                fn(c, begin, std::min(begin + kChunkCols, total));
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace greg
