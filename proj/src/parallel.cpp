#include "poisson_stein/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pstein {

namespace {
std::atomic<std::size_t> override_threads{0};
}

std::size_t default_threads() {
    if (std::size_t t = override_threads.load()) return t;
    if (const char* env = std::getenv("POISSON_STEIN_THREADS")) {
        try {
            long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void set_default_threads(std::size_t threads) { override_threads.store(threads); }

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    if (threads == 0) threads = default_threads();
    if (threads <= 1 || n < 2) {
        body(0, n);
        return;
    }
    const std::size_t chunks = std::min(n, threads * 8);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            std::size_t begin = n * c / chunks;
            std::size_t end = n * (c + 1) / chunks;
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace pstein
