#include "fedtrial/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>

#include <omp.h>

namespace fedtrial {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) {
    g_max_threads.store(n);
    if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return g_max_threads.load(); }

namespace detail {

void run_indexed_parallel(std::size_t n, void* ctx, void (*body)(void*, std::size_t)) {
    const long long count = static_cast<long long>(n);
    // An exception escaping an OpenMP region aborts the process; capture the
    // first one and rethrow it on the calling thread instead.
    std::exception_ptr error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        try {
            body(ctx, static_cast<std::size_t>(i));
        } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

} // namespace detail

} // namespace fedtrial
