#include "eeral/threading.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eeral {

int worker_count() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const char* env = std::getenv("EERAL_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0) n = cap;
        } catch (...) {
            // ignore malformed values, keep the runtime default
        }
    }
    return n < 1 ? 1 : n;
}

void apply_thread_env() {
#ifdef _OPENMP
    omp_set_num_threads(worker_count());
#endif
}

}  // namespace eeral
