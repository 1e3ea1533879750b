#ifndef FROZEN_RDE_PARALLEL_HPP
#define FROZEN_RDE_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace frozen_rde {

/** 0 means: FROZEN_RDE_THREADS if set, else the number of logical cores. */
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char *env = std::getenv("FROZEN_RDE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception &) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Runs fn(i) for i in [0, count) on up to `threads` workers, contiguous chunks per worker.
 * The first exception thrown by any worker is rethrown after all workers join.
 */
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn &&fn) {
  threads = resolve_threads(threads);
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/**
 * Splits [0, count) into fixed blocks and returns fn(begin, end) per block, in block order.
 * Block boundaries do not depend on the thread count, so an in-order reduction is deterministic.
 */
template <typename Fn>
auto map_blocks(std::size_t count, std::size_t block, unsigned threads, Fn &&fn) {
  using Result = decltype(fn(std::size_t{0}, std::size_t{0}));
  const std::size_t blocks = block == 0 ? 0 : (count + block - 1) / block;
  std::vector<Result> out(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    out[b] = fn(b * block, std::min(count, (b + 1) * block));
  });
  return out;
}

} // namespace frozen_rde

#endif // FROZEN_RDE_PARALLEL_HPP
