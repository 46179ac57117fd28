#pragma once

#include <cstddef>

namespace varflow {

/// Caps worker threads at the value of VARFLOW_THREADS when it is set to a
/// positive integer. Returns the thread count in effect.
int configure_threads_from_env();

void set_thread_count(int threads);
int thread_count();

}  // namespace varflow
