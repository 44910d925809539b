#pragma once

// SL(2,R) kernel: one-step Schrodinger matrices, transfer products with
// log-scale renormalization, conjugacy classes, contracted/stable directions
// and Lyapunov estimates.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sslab/word.hpp"

namespace sslab {

/// Row-major 2x2 real matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  /// Inverse assuming unit determinant.
  Mat2 sl_inverse() const { return {d, -b, -c, a}; }
  Mat2 scaled(double s) const { return {a * s, b * s, c * s, d * s}; }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
            x.c * y.b + x.d * y.d};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// Spectral (operator 2-) norm from the closed-form singular values.
double norm(const Mat2& m);
/// Smaller singular value.
double min_singular_value(const Mat2& m);

/// [[E - v, -1], [1, 0]].
constexpr Mat2 schrodinger_step(double energy, double v) { return {energy - v, -1.0, 1.0, 0.0}; }
constexpr Mat2 schrodinger_step_inverse(double energy, double v) {
  return {0.0, 1.0, -1.0, energy - v};
}

/// exp(log_scale) * m. Used wherever a product may leave double range.
struct ScaledMat2 {
  Mat2 m;
  double log_scale = 0.0;

  double log_norm() const;
  /// Trace of the represented matrix; +-inf when it overflows.
  double trace() const;
  /// log|trace| of the represented matrix, -inf for zero trace.
  double log_abs_trace() const;
};

/// Running product T_k ... T_1 of unit-determinant factors. Every 32 pushes
/// the product is rescaled to unit norm (log accumulated) and, while the
/// determinant is still measurable, its drift from 1 is removed.
class TransferAccumulator {
 public:
  static constexpr int kRenormInterval = 32;

  void push(const Mat2& factor);
  void push_step(double energy, double v) { push(schrodinger_step(energy, v)); }
  ScaledMat2 value() const { return {m_, log_scale_}; }

 private:
  void renormalize();

  Mat2 m_ = Mat2::identity();
  double log_scale_ = 0.0;
  int since_renorm_ = 0;
};

/// Point of RP^1, angle reduced to [0, pi).
class Direction {
 public:
  Direction() = default;
  explicit Direction(double angle);
  double angle() const noexcept { return angle_; }
  /// Distance in RP^1 (in [0, pi/2]).
  double distance(Direction other) const;

 private:
  double angle_ = 0.0;
};

/// Uniform grid lo, lo + step, ... <= hi.
class EnergyGrid {
 public:
  EnergyGrid(double lo, double hi, double step);
  static EnergyGrid with_points(double lo, double hi, std::size_t points);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return size_; }
  double operator[](std::size_t i) const { return lo_ + static_cast<double>(i) * step_; }
  std::vector<double> points() const;

 private:
  double lo_, hi_, step_;
  std::size_t size_;
};

enum class Conjugacy { elliptic, parabolic, hyperbolic };
const char* to_string(Conjugacy c);

/// Band around |Tr| = 2 classified as parabolic.
inline constexpr double kParabolicTolerance = 1e-10;
/// Norms at or below 1 + this are treated as conformal (no contracted direction).
inline constexpr double kConformalTolerance = 1e-10;

Conjugacy classify(const Mat2& m);
Conjugacy classify_trace(double trace);

/// Input direction realizing the smaller singular value.
Direction most_contracted_direction(const Mat2& m);
/// Eigendirection of the eigenvalue of modulus < 1; throws for non-hyperbolic input.
Direction stable_direction(const Mat2& m);
/// theta in (0, 1/2) with Tr = 2 cos(2 pi theta); throws for non-elliptic input.
double rotation_angle(const Mat2& m);

/// Monodromy over w with w[0]'s factor applied first. The determinant is
/// re-normalized to 1 when it drifts and is still measurable.
Mat2 transfer(std::span<const double> w, double energy);
ScaledMat2 transfer_scaled(std::span<const double> w, double energy);

/// Potential values v_l for l in [-n, n-1].
class TwoSidedWindow {
 public:
  explicit TwoSidedWindow(std::vector<double> values);
  /// v_l = w[l mod |w|] on [-n, n-1].
  static TwoSidedWindow periodic(const Word& w, int n);

  int half() const noexcept { return half_; }
  double operator()(int l) const;
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
  int half_;
};

/// A^E_m: A(m-1)...A(0) for m >= 1, I for m = 0, A(m)^-1...A(-1)^-1 for m <= -1.
Mat2 two_sided_transfer(const TwoSidedWindow& window, double energy, int m);

struct DirectionSignReport {
  std::size_t grid_points = 0;
  std::size_t retained = 0;
  std::vector<double> skipped;              // energies where a product was not hyperbolic
  std::vector<double> forward_violations;   // finite difference of m_{k1} <= 0
  std::vector<double> backward_violations;  // finite difference of m_{-k2} >= 0
  std::size_t sign_changes = 0;             // zeros of m_{k1} - m_{-k2} in RP^1
  std::size_t sign_change_bound = 0;        // 2 max(k1, k2)
  std::size_t refined_cells = 0;            // grid cells subdivided to keep the lift continuous

  bool ok() const {
    return forward_violations.empty() && backward_violations.empty() &&
           sign_changes <= sign_change_bound;
  }
};

/// Monotonicity of the stable directions m_{k1}(E) (increasing) and
/// m_{-k2}(E) (decreasing) along an energy grid, with continuous lifting.
/// Throws refinement_needed when a neighbor jump > pi/4 cannot be resolved
/// by local subdivision.
DirectionSignReport direction_derivative_signs(const TwoSidedWindow& window,
                                               const EnergyGrid& grid, int k1, int k2);

/// (1/n) log ||A_n|| for the potential j -> potential(j), j = 0..n-1.
double lyapunov_estimate(const std::function<double(long)>& potential, double energy, long n);
/// Same for the periodic potential generated by w.
double lyapunov_estimate(const Word& w, double energy, long n);

/// log ||A^{E,w^j}|| ~ log c + j log lambda, least squares over j = 1..j_max.
struct GrowthFit {
  double c = 0.0;
  double lambda = 0.0;
  double max_residual = 0.0;
};
GrowthFit fit_uniform_growth(const Word& w, double energy, int j_max = 20);

}  // namespace sslab
