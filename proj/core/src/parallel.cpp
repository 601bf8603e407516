#include "hdrv/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hdrv {

int tile_thread_count() {
    if (const char* env = std::getenv("HDRV_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void parallel_chunks(int n, const std::function<void(int, int)>& fn) {
    if (n <= 0) return;
    constexpr int kChunk = 16; // fixed partition, independent of thread count
    const int nchunks = (n + kChunk - 1) / kChunk;
    const int nthreads = std::min(tile_thread_count(), nchunks);
    if (nthreads <= 1) {
        for (int c = 0; c < nchunks; ++c)
            fn(c * kChunk, std::min(n, (c + 1) * kChunk));
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (int c = next.fetch_add(1); c < nchunks; c = next.fetch_add(1))
                fn(c * kChunk, std::min(n, (c + 1) * kChunk));
        });
    for (auto& th : pool) th.join();
}

} // namespace hdrv
