#pragma once

#include <cstdint>
#include <functional>

namespace critlab {

// seed of the i-th independent sample of a stream
std::uint64_t trial_seed(std::uint64_t seed, long trial);

// Splits [0, n) into contiguous blocks and runs body(begin, end, shard) on
// `workers` threads. The first exception thrown by any shard is rethrown here.
void run_sharded(long n, int workers, const std::function<void(long, long, int)>& body);

}  // namespace critlab
