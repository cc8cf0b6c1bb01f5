#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hstokes {

/// Caps worker threads; n <= 0 falls back to HSTOKES_THREADS, then the runtime default.
inline void set_threads(int n) {
    if (n <= 0) {
        if (const char* env = std::getenv("HSTOKES_THREADS")) n = std::atoi(env);
    }
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Static-schedule loop over independent work items. Every item writes only its
/// own outputs, so results do not depend on the thread count.
template <class Body>
void parallel_for(long n, Body&& body) {
    std::exception_ptr error;
    std::mutex m;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard lock(m);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace hstokes
