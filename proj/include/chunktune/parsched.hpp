#pragma once

// Worker-thread pool with a chunked parallel_for over [0, n) supporting
// static, dynamic and guided scheduling. This is the runtime whose dynamic
// chunk size the auto-tuner optimizes.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace chunktune {

enum class ScheduleKind { Static, Dynamic, Guided };

// chunk semantics per kind:
//   Static : block size; 0 means the default ceil(n / n_threads)
//   Dynamic: fixed chunk size claimed from a shared counter (>= 1)
//   Guided : minimum chunk size; claimed length is ceil(remaining/n_threads)
//            floored at this minimum
struct SchedulePolicy {
  ScheduleKind kind = ScheduleKind::Static;
  std::size_t chunk = 0;

  static SchedulePolicy static_default() { return {ScheduleKind::Static, 0}; }
  static SchedulePolicy static_chunked(std::size_t c) {
    require_chunk(c);
    return {ScheduleKind::Static, c};
  }
  static SchedulePolicy dynamic(std::size_t c) {
    require_chunk(c);
    return {ScheduleKind::Dynamic, c};
  }
  static SchedulePolicy guided(std::size_t min_chunk = 1) {
    require_chunk(min_chunk);
    return {ScheduleKind::Guided, min_chunk};
  }

 private:
  static void require_chunk(std::size_t c) {
    if (c < 1) throw std::invalid_argument("chunk must be >= 1");
  }
};

// High-resolution monotonic timestamp in seconds.
inline double monotonic_now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Reads the CHUNKTUNE_THREADS override; falls back to the hardware
// concurrency (at least 1) when unset.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("CHUNKTUNE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw std::runtime_error(std::string("invalid CHUNKTUNE_THREADS value: ") + env);
    return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1u;
}

class ThreadPool {
 public:
  explicit ThreadPool(unsigned n_threads) {
    if (n_threads < 1) throw std::invalid_argument("n_threads must be >= 1");
    n_threads_ = n_threads;
    workers_.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w)
      workers_.emplace_back([this, w] { worker_loop(w); });
  }

  ThreadPool() : ThreadPool(default_thread_count()) {}

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::unique_lock lk(mtx_);
      shutdown_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  unsigned n_threads() const { return n_threads_; }

  // Invokes body on disjoint contiguous subranges exactly covering [0, n).
  // Blocks until every index has been processed. An exception thrown by the
  // body stops further claims and is rethrown here after all workers finish.
  void parallel_for(std::size_t n, const SchedulePolicy& policy,
                    const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    bool expected = false;
    if (!in_flight_.compare_exchange_strong(expected, true))
      throw std::logic_error("parallel_for: pool already running a loop");

    job_.n = n;
    job_.policy = policy;
    job_.body = &body;
    job_.next.store(0, std::memory_order_relaxed);
    job_.cursor = 0;
    job_.remaining = n;
    job_.abort.store(false, std::memory_order_relaxed);
    job_.error = nullptr;
    job_.done_count = 0;

    std::size_t chunk = policy.chunk;
    if (policy.kind == ScheduleKind::Static && chunk == 0)
      chunk = (n + n_threads_ - 1) / n_threads_;
    job_.chunk = chunk;

    {
      std::unique_lock lk(mtx_);
      generation_++;
    }
    cv_.notify_all();

    {
      std::unique_lock lk(mtx_);
      done_cv_.wait(lk, [this] { return job_.done_count == n_threads_; });
    }

    in_flight_.store(false);
    if (job_.error) std::rethrow_exception(job_.error);
  }

 private:
  struct Job {
    std::size_t n = 0;
    SchedulePolicy policy;
    std::size_t chunk = 0;
    const std::function<void(std::size_t, std::size_t)>* body = nullptr;
    std::atomic<std::size_t> next{0};       // dynamic claim counter
    std::size_t cursor = 0;                 // guided, under claim_mtx
    std::size_t remaining = 0;              // guided, under claim_mtx
    std::atomic<bool> abort{false};
    std::exception_ptr error;
    unsigned done_count = 0;
  };

  void worker_loop(unsigned rank) {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lk(mtx_);
        cv_.wait(lk, [&] { return shutdown_ || generation_ != seen; });
        if (shutdown_) return;
        seen = generation_;
      }
      try {
        run_job(rank);
      } catch (...) {
        job_.abort.store(true, std::memory_order_relaxed);
        std::unique_lock lk(mtx_);
        if (!job_.error) job_.error = std::current_exception();
      }
      {
        std::unique_lock lk(mtx_);
        job_.done_count++;
      }
      done_cv_.notify_one();
    }
  }

  void run_job(unsigned rank) {
    const std::size_t n = job_.n;
    const std::size_t chunk = job_.chunk;
    const auto& body = *job_.body;
    switch (job_.policy.kind) {
      case ScheduleKind::Static: {
        // Chunks assigned round-robin by rank before execution begins.
        const std::size_t n_chunks = (n + chunk - 1) / chunk;
        for (std::size_t j = rank; j < n_chunks; j += n_threads_) {
          if (job_.abort.load(std::memory_order_relaxed)) return;
          const std::size_t b = j * chunk;
          body(b, std::min(n, b + chunk));
        }
        break;
      }
      case ScheduleKind::Dynamic: {
        for (;;) {
          if (job_.abort.load(std::memory_order_relaxed)) return;
          const std::size_t b = job_.next.fetch_add(chunk, std::memory_order_relaxed);
          if (b >= n) return;
          body(b, std::min(n, b + chunk));
        }
        break;
      }
      case ScheduleKind::Guided: {
        for (;;) {
          if (job_.abort.load(std::memory_order_relaxed)) return;
          std::size_t b, e;
          {
            std::unique_lock lk(claim_mtx_);
            if (job_.remaining == 0) return;
            std::size_t len = (job_.remaining + n_threads_ - 1) / n_threads_;
            len = std::max(len, chunk);
            len = std::min(len, job_.remaining);
            b = job_.cursor;
            e = b + len;
            job_.cursor = e;
            job_.remaining -= len;
          }
          body(b, e);
        }
        break;
      }
    }
  }

  unsigned n_threads_ = 0;
  std::vector<std::thread> workers_;
  std::mutex mtx_;
  std::mutex claim_mtx_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::uint64_t generation_ = 0;
  bool shutdown_ = false;
  std::atomic<bool> in_flight_{false};
  Job job_;
};

}  // namespace chunktune
