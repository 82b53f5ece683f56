#pragma once

namespace cbctforge {

// Caps the worker pool; n <= 0 restores the hardware default.
// Results are identical for any thread count: parallel loops write disjoint
// outputs and accumulate per-element sums sequentially.
void set_thread_count(int n);
int thread_count();

}  // namespace cbctforge
