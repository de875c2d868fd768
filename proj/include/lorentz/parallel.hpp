#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lorentz {

/// Work is cut into fixed-size blocks of trial indices. Block boundaries depend
/// only on (total, block_size), so a reduction that folds block results in
/// block order is independent of the number of workers.
struct BlockRange {
  std::uint64_t index{0};
  std::uint64_t begin{0};
  std::uint64_t end{0};
};

inline std::vector<BlockRange> make_blocks(std::uint64_t total, std::uint64_t block_size) {
  std::vector<BlockRange> blocks;
  if (block_size == 0) block_size = 1;
  for (std::uint64_t b = 0, i = 0; b < total; b += block_size, ++i) {
    blocks.push_back({i, b, std::min(total, b + block_size)});
  }
  return blocks;
}

/// Runs fn(BlockRange) for every block on `threads` workers and returns the
/// results in block order. The first exception thrown by any block is
/// rethrown after all workers stop.
template <typename Fn>
auto run_blocks(std::uint64_t total, std::uint64_t block_size, unsigned threads, Fn fn)
    -> std::vector<decltype(fn(BlockRange{}))> {
  using Result = decltype(fn(BlockRange{}));
  const auto blocks = make_blocks(total, block_size);
  std::vector<Result> out(blocks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= blocks.size() || failed.load()) return;
      try {
        out[i] = fn(blocks[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// LORENTZ_THREADS if set and positive, otherwise the hardware concurrency.
unsigned default_threads();

}  // namespace lorentz
