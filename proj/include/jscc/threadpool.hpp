#ifndef JSCC_THREADPOOL_HPP_
#define JSCC_THREADPOOL_HPP_

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace jscc {

/// Runs fn(i) for i in [0, count). Work items are dispatched to at most
/// `workers` threads; item indices are fixed ahead of time, so any
/// value written per index is identical no matter how many workers run.
inline void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (workers <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  int n_threads = std::min(workers, count);
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(n_threads - 1));
  for (int t = 1; t < n_threads; ++t) threads.emplace_back(body);
  body();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace jscc

#endif  // JSCC_THREADPOOL_HPP_
