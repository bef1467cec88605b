#include "tkeig/runtime.hpp"

#include "tkeig/error.hpp"

namespace tkeig {

WorkerPool::WorkerPool(std::size_t workers, ExecutionMode mode)
    : workers_(workers), mode_(mode), errors_(workers)
{
    if (workers == 0) {
        throw InvalidConfigError("worker count must be at least 1");
    }
    if (mode_ == ExecutionMode::Threaded && workers_ > 1) {
        threads_.reserve(workers_);
        for (std::size_t id = 0; id < workers_; ++id) {
            threads_.emplace_back([this, id] { worker_loop(id); });
        }
    }
}

WorkerPool::~WorkerPool()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) {
        t.join();
    }
}

void WorkerPool::run(const std::function<void(std::size_t)>& task)
{
    ++phases_;
    if (threads_.empty()) {
        for (std::size_t id = 0; id < workers_; ++id) {
            task(id);
        }
        return;
    }

    {
        std::lock_guard lock(mutex_);
        task_ = &task;
        pending_ = workers_;
        ++generation_;
    }
    start_cv_.notify_all();

    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    task_ = nullptr;
    for (auto& err : errors_) {
        if (err) {
            auto first = err;
            for (auto& e : errors_) {
                e = nullptr;
            }
            std::rethrow_exception(first);
        }
    }
}

void WorkerPool::worker_loop(std::size_t id)
{
    std::size_t seen = 0;
    for (;;) {
        const std::function<void(std::size_t)>* task = nullptr;
        {
            std::unique_lock lock(mutex_);
            start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) {
                return;
            }
            seen = generation_;
            task = task_;
        }
        try {
            (*task)(id);
        } catch (...) {
            errors_[id] = std::current_exception();
        }
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0) {
                done_cv_.notify_one();
            }
        }
    }
}

} // namespace tkeig
