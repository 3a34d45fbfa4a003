#pragma once

namespace emcel {

/// Applies the EMCEL_THREADS cap (0 or unset = OpenMP default) and returns
/// the thread count parallel kernels will use.
int configure_threads();

int max_threads();

}  // namespace emcel
