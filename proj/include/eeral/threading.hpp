#pragma once

namespace eeral {

// Worker cap from the EERAL_THREADS environment variable: unset or 0 means
// use the runtime default. Returns the resolved count.
int worker_count();

// Applies the cap to the OpenMP runtime. Call once at program start.
void apply_thread_env();

}  // namespace eeral
