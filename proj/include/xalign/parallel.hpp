#pragma once

namespace xalign {

/// Worker count for the OpenMP kernels. Defaults to XALIGN_THREADS when set,
/// else the OpenMP runtime default. Results never depend on this value.
int thread_count();
void set_thread_count(int n);

}  // namespace xalign
