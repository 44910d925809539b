#pragma once

// Density of states: truncation eigenvalue counting, phase-averaged IDS,
// Thouless-formula cross-check, Lyapunov-based Kotani diagnostic, energy sets
// carrying polynomially bounded solutions, and a concentration indicator.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sslab/bandset.hpp"
#include "sslab/word.hpp"

namespace sslab {

class CodingSystem;

/// Eigenvalues strictly below E of the Dirichlet truncation with diagonal v.
std::size_t eigenvalue_count(std::span<const double> v, double energy, bool* retried = nullptr);

/// Potential window of length N for phase index i.
using WindowSampler = std::function<std::vector<double>(std::size_t phase, std::size_t N)>;

/// Cyclic shifts of a periodic word (phase i starts at offset i mod |w|).
WindowSampler periodic_sampler(const Word& w);
/// Orbit windows of a coding from phases drawn with the seed.
WindowSampler coding_sampler(const CodingSystem& sys, std::uint64_t seed);

struct IdsSample {
  std::vector<double> energies;
  std::vector<double> k;
  std::size_t N = 0;
  std::size_t phases = 0;
};

/// Default grid: 4001 points on [min - 2.5, max + 2.5].
std::vector<double> default_energy_grid(double vmin, double vmax, std::size_t points = 4001);

/// k(E) = mean over phases of eigenvalue_count / N.
IdsSample ids_curve(const WindowSampler& sampler, std::size_t N, std::span<const double> energies,
                    std::size_t phases);
IdsSample ids_curve_serial(const WindowSampler& sampler, std::size_t N,
                           std::span<const double> energies, std::size_t phases);

/// Largest jump of k between adjacent grid points.
double max_jump(const IdsSample& ids);

/// integral of log|E - x| dk(x) with dk uniform inside each grid cell.
double log_potential(const IdsSample& ids, double energy);

struct ThoulessReport {
  std::vector<double> energies;
  std::vector<double> lyapunov;  // lyapunov_estimate over lyapunov_length sites
  std::vector<double> integral;  // log_potential of the truncation IDS
  double max_error = 0.0;
};

struct ThoulessOptions {
  std::size_t N = 2000;
  std::size_t phases = 64;
  std::size_t grid_points = 4001;
  long lyapunov_length = 100000;
};

ThoulessReport thouless_check(const Word& w, std::span<const double> energies,
                              const ThoulessOptions& opt = {});

struct KotaniReport {
  std::size_t in_spectrum = 0;
  std::size_t small = 0;    // grid energies in the spectrum with L < delta
  double fraction = 0.0;    // small / in_spectrum
};

/// Fraction of grid energies inside the spectrum estimate whose Lyapunov
/// estimate over the sample is below delta.
KotaniReport kotani_diagnostic(std::span<const double> sample, std::span<const double> energies,
                               const BandSet& spectrum, double delta);

struct PolyBoundedSet {
  double gamma = 0.0;
  std::size_t N = 0;
  BandSet lambda;
  BandSet estimate;
  double measure = 0.0;
  double grid_step = 0.0;
  std::size_t theta_points = 256;
  std::size_t energies_tested = 0;
  std::size_t energies_accepted = 0;
};

/// min over theta of max_{|n| <= N} |u_theta(n)| / (1 + |n|), where u_theta
/// solves the difference equation with (u(0), u(1)) = (cos theta, sin theta).
/// `v` holds v_{-N}..v_N (length 2N + 1).
double poly_bound_objective(std::span<const double> v, double energy, std::size_t theta_points = 256);

/// Grid estimate of {E in Lambda : objective <= gamma}; each accepted grid
/// point contributes its cell (clipped to Lambda). Throws refinement_needed
/// when most accepted points are isolated on the grid.
PolyBoundedSet poly_bounded_energy_set(std::span<const double> v, double gamma,
                                       const BandSet& lambda, double grid_step,
                                       std::size_t theta_points = 256);
PolyBoundedSet poly_bounded_energy_set_serial(std::span<const double> v, double gamma,
                                              const BandSet& lambda, double grid_step,
                                              std::size_t theta_points = 256);

/// Least total length of grid cells carrying >= mass of dk (greedy by density,
/// last cell taken fractionally).
double singularity_indicator(const IdsSample& ids, double mass);

}  // namespace sslab
