#pragma once

// One-frequency quasiperiodic potentials f(omega + n alpha): spectra for
// rational alpha, step approximation, hat-bump gap closing, DOS perturbation
// bounds and continuity probes along rational approximants.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sslab/bandset.hpp"
#include "sslab/word.hpp"

namespace sslab {

/// Reduced p/q with q >= 1.
struct Rational {
  long p = 0;
  long q = 1;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
  bool operator==(const Rational&) const = default;
};

Rational make_rational(long p, long q);

/// height * phi((x - center) / half_width) on the circle, phi(t) = 1 - |t| on [-1, 1].
struct Bump {
  double center = 0.0;
  double half_width = 0.0;
  double height = 0.0;
};

enum class SamplingKind { step, trig, tabulated };

class SamplingFunction {
 public:
  static SamplingFunction constant(double c);
  /// values[j] on [b_j, b_{j+1}) with the last piece wrapping around to b_0 + 1.
  static SamplingFunction step(std::vector<Rational> breakpoints, std::vector<double> values);
  /// a0 + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x), k = 1..K.
  static SamplingFunction trig(double a0, std::vector<double> cos_coef, std::vector<double> sin_coef);
  /// Periodic linear interpolation of values at x = j / M.
  static SamplingFunction tabulated(std::vector<double> values);

  SamplingFunction with_bumps(const std::vector<Bump>& extra) const;

  SamplingKind kind() const noexcept { return kind_; }
  const std::vector<Rational>& breakpoints() const noexcept { return breaks_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double a0() const noexcept { return a0_; }
  const std::vector<double>& cos_coef() const noexcept { return cos_; }
  const std::vector<double>& sin_coef() const noexcept { return sin_; }
  const std::vector<Bump>& bumps() const noexcept { return bumps_; }

  double operator()(double x) const;
  double base(double x) const;  // without bumps
  double bump_sum(double x) const;

  double sup_norm() const;
  /// sup of the bump part; exact (the sum is piecewise linear).
  double bump_sup_norm() const;
  /// Lipschitz bound of everything except step jumps.
  double lipschitz() const;
  /// Lipschitz bound on [lo, hi] (bumps not meeting it are ignored).
  double lipschitz_on(double lo, double hi) const;
  /// Points of [0, 1) where the function jumps or a bump has a kink.
  std::vector<double> kinks() const;
  /// True when the function has no continuous variation at all.
  bool piecewise_constant() const;

  std::string describe() const;

 private:
  SamplingKind kind_ = SamplingKind::step;
  std::vector<Rational> breaks_;
  std::vector<double> values_;  // step values or table
  double a0_ = 0.0;
  std::vector<double> cos_, sin_;
  std::vector<Bump> bumps_;
};

/// (f(omega), f(omega + alpha), ..., f(omega + (q-1) alpha)).
Word qp_word(const SamplingFunction& f, Rational alpha, double omega);

struct QPModel {
  Rational alpha;
  SamplingFunction f = SamplingFunction::constant(0.0);
  double omega = 0.0;
  Word period() const { return qp_word(f, alpha, omega); }
};

struct RationalSpectrumOptions {
  std::size_t P = 0;           // initial phase count on [0, 1); 0 means 8q
  std::size_t P_max = 0;       // 0 means 4096 q
  double tol = 1e-4;           // Hausdorff change between refinements
  bool refine = true;          // false: sample once at P, no convergence loop
};

struct RationalSpectrum {
  BandSet inner;   // union of sampled spectra
  BandSet outer;   // each sampled band widened by the local Lipschitz bound
  std::size_t P = 0;
  std::size_t samples = 0;
  double widening = 0.0;  // largest widening used for the outer set
  double last_change = 0.0;
  bool exact = false;     // piecewise-constant f: one sample per piece suffices
};

/// Sigma_{p/q, f}: union over omega of the spectra of the period-q words.
RationalSpectrum rational_spectrum(Rational alpha, const SamplingFunction& f,
                                   const RationalSpectrumOptions& opt = {});

struct StepApproximation {
  SamplingFunction s = SamplingFunction::constant(0.0);
  double error_bound = 0.0;  // modulus of continuity of f at 1/B
};

StepApproximation step_approximation(const SamplingFunction& f, std::size_t B);

struct GapFix {
  Interval gap;
  double omega = 0.0;       // center of the bump family
  double abut_edge = 0.0;   // largest band edge <= gap.lo at omega
  bool located = false;     // abut_edge + epsilon reaches gap.hi
};

struct GapClosingOptions {
  double epsilon = 0.0;       // 0: twice the widest gap, at most |I| / 10
  double r = 1e-3;
  std::size_t scan_phases = 4096;
  double verify_tol = 1e-4;
};

struct GapClosing {
  SamplingFunction h = SamplingFunction::constant(0.0);
  std::vector<GapFix> gaps;
  std::vector<Bump> bumps;
  double epsilon = 0.0;
  double r = 0.0;
  double half_width = 0.0;
  double support_total = 0.0;
  double sup_difference = 0.0;  // ||g - h||_inf
  bool adjusted = false;        // coinciding centers were moved apart
  std::size_t verify_points = 0;
  std::vector<double> uncovered;
  bool verified = false;
};

GapClosing gap_closing_perturbation(Rational beta, const SamplingFunction& g, Interval I,
                                    const GapClosingOptions& opt = {});

/// Integral of psi against the DOS of a periodic word, over [lo, hi].
double periodic_dos_integral(const Word& w, const std::function<double(double)>& psi,
                             const std::function<double(double)>& dpsi, double lo, double hi,
                             std::size_t points = 4001);

struct DosPerturbationReport {
  double r = 0.0;  // measured support of h - g
  std::vector<double> discrepancy;  // |int psi dk_g - int psi dk_h| per test function
  std::vector<double> sigma;        // Monte Carlo standard error
  double bound = 0.0;               // 2 r
  bool ok = true;                   // discrepancy <= 2r + 3 sigma for every psi
};

/// h must equal g plus bumps; phases are sampled inside the bump supports.
DosPerturbationReport dos_perturbation_bound(Rational beta, const SamplingFunction& g,
                                             const SamplingFunction& h, std::size_t test_functions,
                                             std::size_t samples, std::uint64_t seed);

struct ApproximantStep {
  Rational alpha;
  SamplingFunction f = SamplingFunction::constant(0.0);
};

/// Convergents F_{n-1}/F_n of the golden mean with 2 <= q <= max_q.
std::vector<Rational> golden_convergents(long max_q);

struct HausdorffProbe {
  std::vector<BandSet> spectra;
  std::vector<double> consecutive;  // d(Sigma_s, Sigma_{s+1})
  std::vector<double> to_last;      // d(Sigma_s, Sigma_last)
  bool decreasing = false;          // consecutive strictly decreasing
};

HausdorffProbe hausdorff_continuity_probe(const std::vector<ApproximantStep>& steps,
                                          const RationalSpectrumOptions& opt = {});

/// Phase-averaged exact periodic IDS of p/q, f on the energies.
std::vector<double> rational_ids(Rational alpha, const SamplingFunction& f,
                                 std::span<const double> energies, std::size_t phases);

struct IdsProbe {
  std::vector<std::vector<double>> curves;
  std::vector<double> consecutive;
  std::vector<double> to_last;
  bool decreasing = false;
};

IdsProbe ids_continuity_probe(const std::vector<ApproximantStep>& steps,
                              std::span<const double> energies, std::size_t phases);

}  // namespace sslab
