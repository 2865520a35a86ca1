#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hardi {

// Process-wide worker cap used when a caller does not pass one explicitly.
// Defaults to 1; the CLI sets it from --threads.
std::size_t default_threads();
void set_default_threads(std::size_t threads);

// Runs body(i) for i in [0, count) on up to `threads` workers. Work items are
// claimed dynamically, so bodies must write only to slots owned by i; results
// then do not depend on scheduling. The first exception thrown is rethrown.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t workers = std::min(threads, count);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  parallel_for(count, default_threads(), std::forward<Body>(body));
}

}  // namespace hardi
