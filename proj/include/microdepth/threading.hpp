#pragma once

namespace microdepth {

// Thin OpenMP wrappers; compile to 1/no-op in serial builds. All parallel
// kernels in this library write disjoint output elements with a fixed
// per-element summation order, so results are bit-identical for any thread
// count.
int max_threads();
void set_threads(int n);
bool openmp_enabled();

} // namespace microdepth
