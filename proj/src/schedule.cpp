#include "sparsebench/schedule.hpp"

#include <map>
#include <memory>

namespace sparsebench {

std::string to_string(Policy p) { return p == Policy::kStatic ? "static" : "dynamic"; }

Policy parse_policy(std::string_view s) {
  if (s == "static") return Policy::kStatic;
  if (s == "dynamic") return Policy::kDynamic;
  throw ConstructionError("unknown scheduling policy '" + std::string(s) + "'");
}

void Schedule::validate() const {
  if (chunk < 1) throw ConstructionError("schedule chunk must be >= 1");
  if (threads < 1) throw ConstructionError("schedule threads must be >= 1");
}

WorkerPool::WorkerPool(unsigned threads) {
  if (threads < 1) throw ConstructionError("worker pool needs at least one thread");
  workers_.reserve(threads - 1);
  for (unsigned id = 1; id < threads; ++id) workers_.emplace_back([this, id] { loop(id); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : workers_) t.join();
}

void WorkerPool::loop(unsigned id) {
  std::size_t seen = 0;
  for (;;) {
    const std::function<void(unsigned)>* job;
    {
      std::unique_lock lk(mu_);
      start_cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      job = job_;
    }
    try {
      (*job)(id);
    } catch (...) {
      std::lock_guard lk(mu_);
      if (!error_) error_ = std::current_exception();
    }
    {
      std::lock_guard lk(mu_);
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }
}

void WorkerPool::run(const std::function<void(unsigned)>& job) {
  {
    std::lock_guard lk(mu_);
    job_ = &job;
    pending_ = static_cast<unsigned>(workers_.size());
    error_ = nullptr;
    ++generation_;
  }
  start_cv_.notify_all();
  std::exception_ptr local;
  try {
    job(0);
  } catch (...) {
    local = std::current_exception();
  }
  std::unique_lock lk(mu_);
  done_cv_.wait(lk, [&] { return pending_ == 0; });
  job_ = nullptr;
  if (local) std::rethrow_exception(local);
  if (error_) std::rethrow_exception(std::exchange(error_, nullptr));
}

WorkerPool& WorkerPool::shared(unsigned threads) {
  static std::mutex mu;
  static std::map<unsigned, std::unique_ptr<WorkerPool>> pools;
  std::lock_guard lk(mu);
  auto& slot = pools[threads];
  if (!slot) slot = std::make_unique<WorkerPool>(threads);
  return *slot;
}

}  // namespace sparsebench
