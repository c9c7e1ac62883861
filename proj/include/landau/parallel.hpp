#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace landau {

// Worker count: LANDAU_THREADS env var overrides hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("LANDAU_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Deterministic parallel map over [0, n): the index space is split into
// contiguous chunks, one thread per chunk.  Each task must write only to
// state owned by its own index (disjoint slices), so the result is
// independent of the thread count.  `fn(i, worker)` receives the worker id
// so callers can hand out per-worker scratch buffers.
template <class F>
void parallel_for(int n, F&& fn, int max_workers = -1) {
  if (n <= 0) return;
  int nw = worker_count();
  if (max_workers > 0) nw = std::min(nw, max_workers);
  nw = std::min(nw, n);
  if (nw <= 1) {
    for (int i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nw);
  std::exception_ptr err;
  std::mutex err_mu;
  for (int w = 0; w < nw; ++w) {
    int lo = static_cast<int>(static_cast<long long>(n) * w / nw);
    int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / nw);
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (int i = lo; i < hi; ++i) fn(i, w);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace landau
