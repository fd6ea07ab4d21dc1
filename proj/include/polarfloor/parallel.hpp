#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace polarfloor {

/// Splits [begin, end) into at most `workers` contiguous chunks and runs
/// fn(worker_slot, chunk_begin, chunk_end) on each, joining before return.
/// The chunk layout never affects results: callers accumulate into
/// per-slot state keyed by frame index only.
template <typename Fn>
void parallel_chunks(std::uint64_t begin, std::uint64_t end, int workers,
                     Fn&& fn) {
  const std::uint64_t total = end > begin ? end - begin : 0;
  if (total == 0) return;
  const int slots =
      int(std::min<std::uint64_t>(std::uint64_t(workers > 1 ? workers : 1), total));
  if (slots == 1) {
    fn(0, begin, end);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(size_t(slots));
  const std::uint64_t chunk = (total + std::uint64_t(slots) - 1) / std::uint64_t(slots);
  for (int w = 0; w < slots; ++w) {
    const std::uint64_t b = begin + std::uint64_t(w) * chunk;
    const std::uint64_t e = std::min(end, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, w, b, e] {
      try {
        fn(w, b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace polarfloor
