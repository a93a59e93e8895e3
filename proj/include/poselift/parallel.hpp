#pragma once

namespace poselift {

/// Maps a requested thread count to an effective one: 0 means all hardware
/// threads, anything else is clamped to >= 1.
int resolve_threads(int requested);

/// Fixed chunk size for parallel float reductions. Partial sums are computed
/// per chunk and merged in chunk order, so results are identical for every
/// thread count.
inline constexpr int kReductionChunk = 256;

}  // namespace poselift
