#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gcalc {

// Runs fn(i) for i in [0, count). Work is handed out in chunks, but every
// index writes only its own output, so results do not depend on `threads`.
// The first exception thrown by any worker is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn, std::size_t chunk = 16) {
  if (threads <= 1 || count <= chunk) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, (count + chunk - 1) / chunk));
  std::vector<std::jthread> pool;
  pool.reserve(n_workers);
  for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gcalc
