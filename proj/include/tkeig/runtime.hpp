#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace tkeig {

// Threaded: one OS thread per worker. Sequential: the coordinator runs the
// workers' tasks one after another. Both produce identical results because
// workers only touch their own segments and every reduction is combined by
// the coordinator in a fixed order.
enum class ExecutionMode { Threaded, Sequential };

// Fork-join pool standing in for G devices. run() is a full barrier: it
// returns once every worker has finished the task.
class WorkerPool {
public:
    WorkerPool(std::size_t workers, ExecutionMode mode);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t size() const noexcept { return workers_; }
    ExecutionMode mode() const noexcept { return mode_; }
    std::size_t phases() const noexcept { return phases_; }

    // Rethrows the first worker exception after all workers have finished.
    void run(const std::function<void(std::size_t)>& task);

private:
    void worker_loop(std::size_t id);

    std::size_t workers_;
    ExecutionMode mode_;
    std::size_t phases_ = 0;

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t)>* task_ = nullptr;
    std::size_t generation_ = 0;
    std::size_t pending_ = 0;
    bool stopping_ = false;
    std::vector<std::exception_ptr> errors_;
};

} // namespace tkeig
