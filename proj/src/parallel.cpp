#include "sald/parallel.hpp"

#include <algorithm>

namespace sald {

namespace {

std::pair<std::size_t, std::size_t> chunk_bounds(std::size_t n, unsigned workers, unsigned id) {
    const std::size_t chunk = (n + workers - 1) / workers;
    const std::size_t begin = std::min(n, id * chunk);
    return {begin, std::min(n, begin + chunk)};
}

}  // namespace

WorkerPool::WorkerPool(unsigned threads) : size_(std::max(1u, threads)), errors_(size_) {
    // Worker 0 is the calling thread.
    for (unsigned id = 1; id < size_; ++id) {
        threads_.emplace_back([this, id] { worker_loop(id); });
    }
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::run(std::size_t n, const Body& body) {
    if (size_ == 1) {
        body(0, n);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        body_ = &body;
        n_ = n;
        pending_ = size_ - 1;
        std::fill(errors_.begin(), errors_.end(), nullptr);
        ++generation_;
    }
    start_cv_.notify_all();

    const auto [begin, end] = chunk_bounds(n, size_, 0);
    try {
        body(begin, end);
    } catch (...) {
        errors_[0] = std::current_exception();
    }

    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    body_ = nullptr;
    for (auto& e : errors_) {
        if (e) std::rethrow_exception(e);
    }
}

void WorkerPool::worker_loop(unsigned id) {
    std::size_t seen = 0;
    for (;;) {
        const Body* body = nullptr;
        std::size_t n = 0;
        {
            std::unique_lock lock(mutex_);
            start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            body = body_;
            n = n_;
        }
        const auto [begin, end] = chunk_bounds(n, size_, id);
        std::exception_ptr error;
        try {
            if (begin < end) (*body)(begin, end);
        } catch (...) {
            error = std::current_exception();
        }
        {
            std::lock_guard lock(mutex_);
            errors_[id] = error;
            --pending_;
        }
        done_cv_.notify_one();
    }
}

}  // namespace sald
