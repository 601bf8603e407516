#pragma once

#include <functional>

namespace hdrv {

/// Worker count for tile-level loops: HDRV_THREADS env var if set,
/// otherwise hardware concurrency.
int tile_thread_count();

/// Run fn(begin, end) over fixed-size row chunks, possibly concurrently.
/// The chunk partition never depends on the thread count, so per-chunk
/// work (and any per-chunk partial reductions combined in chunk order)
/// is bit-reproducible for any worker count.
void parallel_chunks(int n, const std::function<void(int, int)>& fn);

} // namespace hdrv
