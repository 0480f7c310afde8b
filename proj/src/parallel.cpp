#include "critlab/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "critlab/errors.hpp"
#include "critlab/rng.hpp"

namespace critlab {

std::uint64_t trial_seed(std::uint64_t seed, long trial) { return mix64(seed, std::uint64_t(trial)); }

void run_sharded(long n, int workers, const std::function<void(long, long, int)>& body) {
  require(workers >= 1, "workers must be at least 1");
  if (n <= 0) return;
  const int shards = int(std::min<long>(workers, n));
  if (shards == 1) {
    body(0, n, 0);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  {
    std::vector<std::jthread> pool;
    for (int s = 0; s < shards; ++s) {
      const long begin = n * s / shards, end = n * (s + 1) / shards;
      pool.emplace_back([&, begin, end, s] {
        try {
          body(begin, end, s);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace critlab
