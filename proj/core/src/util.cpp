#include "copulafit/util.hpp"

#include <algorithm>

namespace copulafit {

ThreadPool::ThreadPool(int threads) {
    threads = std::max(0, threads);
    workers_.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) {
        workers_.emplace_back([this] { worker_loop(); });
    }
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard<std::mutex> lk(mu_);
        stop_ = true;
    }
    cv_work_.notify_all();
    for (auto& w : workers_) w.join();
}

void ThreadPool::worker_loop() {
    std::unique_lock<std::mutex> lk(mu_);
    std::size_t seen_generation = 0;
    for (;;) {
        cv_work_.wait(lk, [&] { return stop_ || (job_ != nullptr && generation_ != seen_generation); });
        if (stop_) return;
        seen_generation = generation_;
        ++active_;
        while (next_chunk_ * job_chunk_ < job_n_) {
            const std::size_t idx = next_chunk_++;
            const std::size_t begin = idx * job_chunk_;
            const std::size_t end = std::min(job_n_, begin + job_chunk_);
            lk.unlock();
            (*job_)(idx, begin, end);
            lk.lock();
        }
        --active_;
        if (active_ == 0) cv_done_.notify_all();
    }
}

void ThreadPool::for_chunks(std::size_t n, std::size_t chunk_size,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    if (workers_.empty()) {
        const std::size_t chunks = chunk_count(n, chunk_size);
        for (std::size_t idx = 0; idx < chunks; ++idx) {
            const std::size_t begin = idx * chunk_size;
            fn(idx, begin, std::min(n, begin + chunk_size));
        }
        return;
    }
    std::unique_lock<std::mutex> lk(mu_);
    job_ = &fn;
    job_n_ = n;
    job_chunk_ = chunk_size;
    next_chunk_ = 0;
    ++generation_;
    cv_work_.notify_all();
    // The calling thread also drains chunks instead of idling.
    while (next_chunk_ * job_chunk_ < job_n_) {
        const std::size_t idx = next_chunk_++;
        const std::size_t begin = idx * job_chunk_;
        const std::size_t end = std::min(job_n_, begin + job_chunk_);
        lk.unlock();
        fn(idx, begin, end);
        lk.lock();
    }
    cv_done_.wait(lk, [&] { return active_ == 0; });
    job_ = nullptr;
}

int resolve_threads(int requested) {
    if (requested > 0) return std::min(requested, 16);
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 16u));
}

}  // namespace copulafit
