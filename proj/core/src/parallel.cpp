#include "greg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace greg {

namespace {
std::atomic<int> g_max_threads{0};

int effective_threads(std::size_t n) {
    int cap = g_max_threads.load();
    if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap <= 0) cap = 1;
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cap), n));
}
}  // namespace

void set_max_threads(int n) { g_max_threads.store(n); }
int max_threads() { return g_max_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const int workers = effective_threads(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn,
                     std::size_t* num_chunks_out) {
    if (n == 0) {
        if (num_chunks_out) *num_chunks_out = 0;
        return;
    }
    const std::size_t workers = static_cast<std::size_t>(effective_threads(n));
    const std::size_t chunk_size = (n + workers - 1) / workers;
    std::size_t chunks = (n + chunk_size - 1) / chunk_size;
    if (num_chunks_out) *num_chunks_out = chunks;
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t begin = c * chunk_size;
        const std::size_t end = std::min(n, begin + chunk_size);
        fn(c, begin, end);
    });
}

}  // namespace greg
