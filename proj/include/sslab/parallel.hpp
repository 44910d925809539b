#pragma once

namespace sslab {

// Worker-pool knob shared by every OpenMP kernel. Values < 1 select the
// OpenMP runtime default.
void set_threads(int n);
int threads();

}  // namespace sslab
