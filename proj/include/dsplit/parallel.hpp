#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "dsplit/errors.hpp"

namespace dsplit {

/// Fixed-size worker pool used for data-parallel line sweeps.
///
/// parallel_for splits [0, count) into one contiguous chunk per worker; the
/// partition depends only on count and the worker count, so any body that
/// writes disjoint ranges produces identical results regardless of scheduling.
/// Not reentrant: a body must not call parallel_for on the same executor.
class Executor {
public:
    explicit Executor(int workers = 1) : workers_(workers) {
        if (workers < 1) throw ValidationError("executor needs at least one worker");
        threads_.reserve(static_cast<std::size_t>(workers - 1));
        for (int w = 1; w < workers; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
    }

    Executor(const Executor&) = delete;
    Executor& operator=(const Executor&) = delete;

    ~Executor() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
        }
        wake_.notify_all();
        for (auto& t : threads_) t.join();
    }

    int workers() const noexcept { return workers_; }

    /// Shared single-worker executor for callers that do not care about threading.
    static Executor& serial() {
        static Executor instance(1);
        return instance;
    }

    /// Runs body(begin, end) over a static partition of [0, count).
    template <class Body>
    void parallel_for(std::size_t count, Body&& body) {
        if (workers_ == 1 || count < 2) {
            if (count > 0) body(std::size_t{0}, count);
            return;
        }
        const auto nw = static_cast<std::size_t>(workers_);
        std::function<void(int)> job = [&body, count, nw](int w) {
            const auto wi = static_cast<std::size_t>(w);
            const std::size_t begin = count * wi / nw;
            const std::size_t end = count * (wi + 1) / nw;
            if (begin < end) body(begin, end);
        };
        {
            std::lock_guard lock(mutex_);
            job_ = &job;
            pending_ = workers_ - 1;
            error_ = nullptr;
            ++generation_;
        }
        wake_.notify_all();

        std::exception_ptr local;
        try {
            job(0);
        } catch (...) {
            local = std::current_exception();
        }

        std::unique_lock lock(mutex_);
        done_.wait(lock, [this] { return pending_ == 0; });
        job_ = nullptr;
        if (local) std::rethrow_exception(local);
        if (error_) std::rethrow_exception(error_);
    }

private:
    void worker_loop(int w) {
        std::uint64_t seen = 0;
        for (;;) {
            std::function<void(int)>* job = nullptr;
            {
                std::unique_lock lock(mutex_);
                wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                job = job_;
            }
            std::exception_ptr err;
            try {
                (*job)(w);
            } catch (...) {
                err = std::current_exception();
            }
            {
                std::lock_guard lock(mutex_);
                if (err && !error_) error_ = err;
                --pending_;
            }
            done_.notify_one();
        }
    }

    int workers_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    std::function<void(int)>* job_ = nullptr;
    std::uint64_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

} // namespace dsplit
