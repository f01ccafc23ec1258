#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace copulafit {

// Numeric failure (divergence, degenerate envelope, ...). CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File / parse failure. CLI maps this to exit code 4.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimal persistent worker pool for chunked data-parallel loops.
//
// Work is always split into chunks of a caller-fixed size, each chunk writes only
// its own output slot, and callers combine slots in chunk order afterwards.
// Results are therefore bit-identical for any thread count, including 0 (inline).
class ThreadPool {
public:
    explicit ThreadPool(int threads);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int thread_count() const { return static_cast<int>(workers_.size()); }

    // Runs fn(chunk_index, begin, end) over [0, n) in chunks of chunk_size; blocks until done.
    void for_chunks(std::size_t n, std::size_t chunk_size,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

    static std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
        return chunk_size == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
    }

private:
    void worker_loop();

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_work_;
    std::condition_variable cv_done_;
    const std::function<void(std::size_t, std::size_t, std::size_t)>* job_ = nullptr;
    std::size_t job_n_ = 0;
    std::size_t job_chunk_ = 0;
    std::size_t next_chunk_ = 0;
    std::size_t active_ = 0;
    std::size_t generation_ = 0;
    bool stop_ = false;
};

// Resolves a thread-count request: 0 means "use the hardware", capped at 16.
int resolve_threads(int requested);

}  // namespace copulafit
