#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sald {

// Fixed-size pool that splits an index range [0, n) into one contiguous chunk per
// worker. Chunk boundaries depend only on (n, size()); callers that need
// thread-count independent results must keep per-index work independent of the
// chunking (the samplers do: every particle owns its random streams).
class WorkerPool {
public:
    using Body = std::function<void(std::size_t begin, std::size_t end)>;

    explicit WorkerPool(unsigned threads);
    ~WorkerPool();
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    unsigned size() const { return size_; }

    // Runs body over [0, n) and blocks until every chunk finished. The first
    // exception thrown by any chunk (lowest chunk index) is rethrown.
    void run(std::size_t n, const Body& body);

private:
    void worker_loop(unsigned id);

    unsigned size_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const Body* body_ = nullptr;
    std::size_t n_ = 0;
    std::size_t generation_ = 0;
    unsigned pending_ = 0;
    bool stop_ = false;
    std::vector<std::exception_ptr> errors_;
};

}  // namespace sald
