#include "ogp/common.hpp"

#include <cstdlib>

#include <omp.h>

namespace ogp {

int thread_cap() {
    int hw = omp_get_num_procs();
    if (const char* s = std::getenv("OGP_LAB_THREADS")) {
        int v = std::atoi(s);
        if (v > 0 && v < hw) return v;
    }
    return hw > 0 ? hw : 1;
}

void apply_thread_cap() { omp_set_num_threads(thread_cap()); }

}  // namespace ogp
