#include "varflow/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace varflow {

void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int configure_threads_from_env() {
  if (const char* env = std::getenv("VARFLOW_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) set_thread_count(n);
    } catch (const std::exception&) {
    }
  }
  return thread_count();
}

}  // namespace varflow
