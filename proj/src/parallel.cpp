#include "gwf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <thread>
#include <vector>

namespace gwf {

int resolve_jobs(int requested) {
    if (const char* env = std::getenv("GWF_JOBS")) {
        int v = 0;
        const auto r = std::from_chars(env, env + std::strlen(env), v);
        if (r.ec == std::errc{} && v > 0) return v;
    }
    if (requested > 0) return requested;
    return int(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(n);
    const auto workers = std::size_t(std::clamp<std::size_t>(std::size_t(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) try {
                        body(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
            });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace gwf
