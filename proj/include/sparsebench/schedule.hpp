#pragma once

// Row scheduling for the parallel kernels. Rows are cut into fixed-size
// chunks; with the static policy chunk c goes to worker c mod threads, with
// the dynamic policy workers claim chunks from a shared atomic counter.
// Either way each row is processed by exactly one worker.

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sparsebench/matrix.hpp"

namespace sparsebench {

enum class Policy { kStatic, kDynamic };

std::string to_string(Policy p);
Policy parse_policy(std::string_view s);

struct Schedule {
  Policy policy = Policy::kDynamic;
  index_t chunk = 64;
  unsigned threads = 1;

  void validate() const;
};

/// Fixed set of worker threads. The calling thread acts as worker 0, so a
/// pool of size 1 spawns nothing.
class WorkerPool {
public:
  explicit WorkerPool(unsigned threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  unsigned size() const noexcept { return static_cast<unsigned>(workers_.size()) + 1; }

  /// Runs job(worker_id) once on every worker and waits for all of them.
  /// The first exception thrown by any worker is rethrown here.
  void run(const std::function<void(unsigned)>& job);

  /// Process-wide pool of the given size, created on first use.
  static WorkerPool& shared(unsigned threads);

private:
  void loop(unsigned id);

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(unsigned)>* job_ = nullptr;
  std::size_t generation_ = 0;
  unsigned pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

/// Calls body(begin, end) for every chunk of [0, count) according to the
/// schedule. body must be safe to call concurrently on disjoint ranges.
template <class Body>
void for_each_chunk(index_t count, const Schedule& s, Body&& body) {
  s.validate();
  const index_t chunk = s.chunk;
  const index_t nchunks = count == 0 ? 0 : (count - 1) / chunk + 1;
  auto range = [&](index_t c) {
    const index_t begin = c * chunk;
    const index_t end = count - begin < chunk ? count : begin + chunk;
    body(begin, end);
  };
  if (s.threads == 1) {
    for (index_t c = 0; c < nchunks; ++c) range(c);
    return;
  }
  WorkerPool& pool = WorkerPool::shared(s.threads);
  if (s.policy == Policy::kStatic) {
    const auto workers = static_cast<index_t>(pool.size());
    pool.run([&](unsigned id) {
      for (index_t c = static_cast<index_t>(id); c < nchunks; c += workers) range(c);
    });
  } else {
    std::atomic<index_t> next{0};
    pool.run([&](unsigned) {
      for (index_t c = next.fetch_add(1, std::memory_order_relaxed); c < nchunks;
           c = next.fetch_add(1, std::memory_order_relaxed))
        range(c);
    });
  }
}

}  // namespace sparsebench
