#pragma once

#include <cstddef>
#include <span>

namespace sslab {

/// Number of eigenvalues strictly below E of the Dirichlet truncation with
/// diagonal `diag` and unit off-diagonal, by the LDL^T inertia sweep.
/// A zero pivot means E is (numerically) an eigenvalue of a leading block;
/// the sweep is then retried at E - 1e-12, and `retried` is set if given.
std::size_t sturm_count_below(std::span<const double> diag, double energy,
                              bool* retried = nullptr);

}  // namespace sslab
