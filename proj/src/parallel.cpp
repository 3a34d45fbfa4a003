#include "emcel/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace emcel {

int configure_threads() {
    if (const char* env = std::getenv("EMCEL_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) omp_set_num_threads(n);
        } catch (const std::exception&) {
            // ignore malformed values and keep the default
        }
    }
    return omp_get_max_threads();
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace emcel
