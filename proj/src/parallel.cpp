#include "nlgcl/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace nlgcl {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int threads) {
    g_threads.store(std::max(1, threads));
}

int num_threads() {
    return g_threads.load();
}

void parallel_for_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(num_threads());
    if (workers <= 1 || n < 2 * workers) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

}  // namespace nlgcl
