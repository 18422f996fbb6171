#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ebm {

/// Persistent worker pool executing an indexed task set. Work is split by the
/// caller into chunks whose boundaries depend only on the problem size, never
/// on the thread count; per-chunk results are combined by the caller in chunk
/// order. That makes every reduction bit-identical for any number of threads,
/// which the reproducibility guarantees require. Tasks must not throw.
class ThreadPool {
 public:
  explicit ThreadPool(int threads) {
    if (threads < 1) threads = 1;
    size_ = threads;
    for (int t = 0; t < threads - 1; ++t)
      workers_.emplace_back([this] { worker_loop(); });
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
      ++generation_;
    }
    cv_start_.notify_all();
    for (auto& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const { return size_; }

  /// Run fn(0) .. fn(n_tasks-1), caller thread participating. Returns when
  /// all tasks have finished.
  template <class F>
  void run(int n_tasks, F&& fn) {
    if (n_tasks <= 0) return;
    if (workers_.empty()) {
      for (int t = 0; t < n_tasks; ++t) fn(t);
      return;
    }
    std::function<void(int)> job(std::forward<F>(fn));
    {
      std::lock_guard<std::mutex> lk(mu_);
      job_ = &job;
      n_tasks_ = n_tasks;
      next_task_.store(0, std::memory_order_relaxed);
      active_workers_ = static_cast<int>(workers_.size());
      ++generation_;
    }
    cv_start_.notify_all();
    drain(job);
    std::unique_lock<std::mutex> lk(mu_);
    cv_done_.wait(lk, [this] { return active_workers_ == 0; });
    job_ = nullptr;
  }

 private:
  void drain(const std::function<void(int)>& job) {
    for (;;) {
      const int t = next_task_.fetch_add(1, std::memory_order_relaxed);
      if (t >= n_tasks_) break;
      job(t);
    }
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(int)>* job = nullptr;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_start_.wait(lk, [&] { return stop_ || generation_ != seen; });
        seen = generation_;
        if (stop_) return;
        job = job_;
      }
      if (job) drain(*job);
      {
        std::lock_guard<std::mutex> lk(mu_);
        if (--active_workers_ == 0) cv_done_.notify_all();
      }
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_start_, cv_done_;
  const std::function<void(int)>* job_ = nullptr;
  std::atomic<int> next_task_{0};
  int n_tasks_ = 0;
  int active_workers_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  int size_ = 1;
};

}  // namespace ebm
