#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace spiked {

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
  static std::atomic<unsigned> cap{0};  // 0: hardware concurrency
  return cap;
}
}  // namespace detail

/// Global cap on worker threads (0 restores the hardware default).
inline void set_max_threads(unsigned n) { detail::thread_cap() = n; }

inline unsigned max_threads() {
  const unsigned cap = detail::thread_cap();
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return cap == 0 ? hw : cap;
}

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs; the
/// first exception thrown by any iteration is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(max_threads(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise summation in a fixed tree order, independent of scheduling.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double variance = 0.0;  // unbiased sample variance
  std::size_t count = 0;
};

inline MeanEstimate summarize(std::span<const double> xs) {
  MeanEstimate est;
  est.count = xs.size();
  if (xs.empty()) return est;
  est.mean = pairwise_sum(xs) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - est.mean) * (xs[i] - est.mean);
    est.variance = pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
    est.stderr_ = std::sqrt(est.variance / static_cast<double>(xs.size()));
  }
  return est;
}

}  // namespace spiked
