#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace causaldii {

// Runs every task once on up to `workers` threads. Tasks claim indices from a
// shared counter and must write only to their own output slots, so the result
// is independent of scheduling; with workers <= 1 the loop is sequential.
inline void run_tasks(std::vector<std::function<void()>>& tasks, int workers) {
    if (workers <= 1 || tasks.size() <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                tasks[i]();
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(workers), tasks.size());
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace causaldii
