#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eastlab
{

inline int default_jobs()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(0), ..., fn(count - 1) on `jobs` workers and returns the results in
// replica order, so any later merge is independent of the worker count.
template <typename Fn>
auto run_replicas(std::int64_t count, int jobs, Fn&& fn)
{
    using Result = decltype(fn(std::int64_t{0}));
    std::vector<Result> results(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    if (count <= 0)
        return results;

    const int workers = static_cast<int>(std::clamp<std::int64_t>(jobs, 1, count));
    if (workers == 1) {
        for (std::int64_t i = 0; i < count; ++i)
            results[i] = fn(i);
        return results;
    }

    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::int64_t i = next++; i < count; i = next++) {
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back(work);
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

} // namespace eastlab
