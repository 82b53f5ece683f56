#include "cbctforge/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cbctforge {

#ifdef _OPENMP

void set_thread_count(int n) {
    omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
}

int thread_count() {
    return omp_get_max_threads();
}

#else

void set_thread_count(int) {}

int thread_count() {
    return 1;
}

#endif

}  // namespace cbctforge
