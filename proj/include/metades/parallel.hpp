#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace metades {

/// Execution policy for the data-parallel kernels. Every kernel writes each
/// item's result to its own pre-sized slot and draws randomness only from
/// seeds derived before dispatch, so both policies produce bit-identical
/// output; tests assert this and `serial` doubles as the reference path.
enum class Exec { serial, parallel };

template <typename Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
#ifdef _OPENMP
    if (exec == Exec::parallel) {
        #pragma omp parallel for schedule(dynamic, 1)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
    }
#else
    (void)exec;
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace metades
