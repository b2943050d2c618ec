#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fluxlab {

template <typename R>
struct ParallelOutcome {
  std::vector<R> results;    // slot i holds fn(i); valid when completed
  bool completed = true;
  std::vector<long> failed;  // indices whose retries were exhausted
};

// Runs fn(0..n-1) over a pool of threads. Results land in index order, so
// the outcome is identical for every worker count. A task that keeps
// throwing after `retries` extra attempts aborts the run.
template <typename R>
ParallelOutcome<R> run_indexed(long n, int workers,
                               const std::function<R(long)>& fn,
                               int retries = 2) {
  ParallelOutcome<R> out;
  out.results.resize(n);
  if (n == 0) return out;

  workers = static_cast<int>(std::max<long>(1, std::min<long>(workers, n)));
  std::atomic<long> next{0};
  std::atomic<bool> abort{false};
  std::mutex mu;

  const auto worker = [&] {
    while (!abort.load()) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      bool done = false;
      for (int attempt = 0; attempt <= retries && !done; ++attempt) {
        try {
          out.results[i] = fn(i);
          done = true;
        } catch (const std::exception&) {
          if (attempt == retries) {
            std::lock_guard<std::mutex> lock(mu);
            out.failed.push_back(i);
            abort.store(true);
          }
        }
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  out.completed = out.failed.empty();
  return out;
}

}  // namespace fluxlab
