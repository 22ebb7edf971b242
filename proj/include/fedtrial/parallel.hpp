#pragma once

#include <cstddef>

namespace fedtrial {

// Every parallel kernel has a serial twin with the identical reduction
// structure, so outputs are bit-identical across Exec modes and thread
// counts. Tests assert the equivalence; benchmarks compare throughput.
enum class Exec { Serial, Parallel };

// 0 means "leave the OpenMP default alone".
void set_max_threads(int n);
int max_threads();

namespace detail {
void run_indexed_parallel(std::size_t n, void* ctx, void (*body)(void*, std::size_t));
}

// Order-independent loop over [0, n). Each index must write only to its own
// output slot.
template <typename F>
void parallel_for(std::size_t n, Exec mode, F&& body) {
    if (mode == Exec::Serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    auto trampoline = [](void* ctx, std::size_t i) { (*static_cast<F*>(ctx))(i); };
    detail::run_indexed_parallel(n, &body, trampoline);
}

} // namespace fedtrial
