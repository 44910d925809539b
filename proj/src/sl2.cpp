#include "sslab/sl2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sslab/errors.hpp"
#include "sslab/periodic.hpp"

namespace sslab {

namespace {

constexpr double kPi = std::numbers::pi;

// Singular values of [[a,b],[c,d]] are (p +- q)/2 with
// p = |(a+d, b-c)|, q = |(a-d, b+c)|.
struct SingularPair {
  double p, q;
};

SingularPair singular_pair(const Mat2& m) {
  return {std::hypot(m.a + m.d, m.b - m.c), std::hypot(m.a - m.d, m.b + m.c)};
}

double reduce_mod_pi(double angle) {
  double r = std::fmod(angle, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r -= kPi;
  return r;
}

// Representative of x modulo pi in (-pi/2, pi/2].
double wrap_half_pi(double x) {
  double r = std::remainder(x, kPi);
  if (r <= -kPi / 2) r += kPi;
  return r;
}

}  // namespace

double norm(const Mat2& m) {
  const auto [p, q] = singular_pair(m);
  return 0.5 * (p + q);
}

double min_singular_value(const Mat2& m) {
  const auto [p, q] = singular_pair(m);
  const double big = 0.5 * (p + q);
  if (big == 0.0) return 0.0;
  // |det| / sigma_max avoids cancellation in (p - q)/2.
  return std::abs(m.det()) / big;
}

double ScaledMat2::log_norm() const { return log_scale + std::log(norm(m)); }

double ScaledMat2::trace() const {
  const double t = m.trace();
  if (t == 0.0) return 0.0;
  const double lg = std::log(std::abs(t)) + log_scale;
  if (lg > 709.0) return t > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
  return t * std::exp(log_scale);
}

double ScaledMat2::log_abs_trace() const {
  const double t = m.trace();
  if (t == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(t)) + log_scale;
}

void TransferAccumulator::push(const Mat2& factor) {
  m_ = factor * m_;
  if (++since_renorm_ >= kRenormInterval) renormalize();
}

void TransferAccumulator::renormalize() {
  since_renorm_ = 0;
  const double n = norm(m_);
  if (!(n > 0.0) || !std::isfinite(n)) return;
  // Determinant drift is only observable while the entries are moderate;
  // beyond that ad - bc is pure cancellation noise.
  if (log_scale_ == 0.0 && n < 1e4) {
    const double det = m_.det();
    if (det > 0.0 && std::abs(det - 1.0) > 1e-14) m_ = m_.scaled(1.0 / std::sqrt(det));
  }
  if (n > 1e8 || log_scale_ != 0.0) {
    m_ = m_.scaled(1.0 / n);
    log_scale_ += std::log(n);
  }
}

Direction::Direction(double angle) : angle_(reduce_mod_pi(angle)) {}

double Direction::distance(Direction other) const {
  return std::abs(wrap_half_pi(angle_ - other.angle_));
}

EnergyGrid::EnergyGrid(double lo, double hi, double step) : lo_(lo), hi_(hi), step_(step) {
  if (!(lo < hi)) fail(ErrorKind::domain, "energy grid requires lo < hi");
  if (!(step > 0.0)) fail(ErrorKind::domain, "energy grid requires step > 0");
  size_ = static_cast<std::size_t>(std::floor((hi - lo) / step * (1.0 + 1e-12))) + 1;
}

EnergyGrid EnergyGrid::with_points(double lo, double hi, std::size_t points) {
  if (points < 2) fail(ErrorKind::domain, "energy grid needs at least 2 points");
  EnergyGrid g(lo, hi, (hi - lo) / static_cast<double>(points - 1));
  g.size_ = points;
  return g;
}

std::vector<double> EnergyGrid::points() const {
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = (*this)[i];
  return out;
}

const char* to_string(Conjugacy c) {
  switch (c) {
    case Conjugacy::elliptic: return "elliptic";
    case Conjugacy::parabolic: return "parabolic";
    case Conjugacy::hyperbolic: return "hyperbolic";
  }
  return "?";
}

Conjugacy classify_trace(double trace) {
  const double excess = std::abs(trace) - 2.0;
  if (excess < -kParabolicTolerance) return Conjugacy::elliptic;
  if (excess > kParabolicTolerance) return Conjugacy::hyperbolic;
  return Conjugacy::parabolic;
}

Conjugacy classify(const Mat2& m) { return classify_trace(m.trace()); }

Direction most_contracted_direction(const Mat2& m) {
  if (norm(m) <= 1.0 + kConformalTolerance)
    fail(ErrorKind::undefined_direction, "matrix is conformal; no most contracted direction");
  // Major right singular vector of m is the top eigenvector of m^T m.
  const double p = m.a * m.a + m.c * m.c;
  const double r = m.b * m.b + m.d * m.d;
  const double q = m.a * m.b + m.c * m.d;
  const double major = 0.5 * std::atan2(2.0 * q, p - r);
  return Direction(major + kPi / 2);
}

Direction stable_direction(const Mat2& m) {
  const double t = m.trace();
  if (classify_trace(t) != Conjugacy::hyperbolic)
    fail(ErrorKind::classification, "stable direction requires a hyperbolic matrix");
  const double disc = std::sqrt((t - 2.0) * (t + 2.0));
  // Small-modulus root without cancellation.
  const double mu = t > 0 ? 2.0 / (t + disc) : 2.0 / (t - disc);
  // Null vectors of m - mu I from either row; take the better conditioned.
  const double x1 = m.b, y1 = mu - m.a;
  const double x2 = mu - m.d, y2 = m.c;
  if (std::hypot(x1, y1) >= std::hypot(x2, y2)) return Direction(std::atan2(y1, x1));
  return Direction(std::atan2(y2, x2));
}

double rotation_angle(const Mat2& m) {
  const double t = m.trace();
  if (classify_trace(t) != Conjugacy::elliptic)
    fail(ErrorKind::classification, "rotation angle requires an elliptic matrix");
  return std::acos(std::clamp(t / 2.0, -1.0, 1.0)) / (2.0 * kPi);
}

ScaledMat2 transfer_scaled(std::span<const double> w, double energy) {
  if (w.empty()) fail(ErrorKind::domain, "transfer over empty word");
  TransferAccumulator acc;
  for (double v : w) acc.push_step(energy, v);
  return acc.value();
}

Mat2 transfer(std::span<const double> w, double energy) {
  const ScaledMat2 s = transfer_scaled(w, energy);
  Mat2 m = s.m.scaled(std::exp(s.log_scale));
  if (s.log_scale == 0.0 && norm(m) < 1e4) {
    const double det = m.det();
    if (det > 0.0 && std::abs(det - 1.0) > 1e-14) m = m.scaled(1.0 / std::sqrt(det));
  }
  return m;
}

TwoSidedWindow::TwoSidedWindow(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty() || values_.size() % 2 != 0)
    fail(ErrorKind::domain, "two-sided window needs an even, nonzero number of values");
  half_ = static_cast<int>(values_.size() / 2);
}

TwoSidedWindow TwoSidedWindow::periodic(const Word& w, int n) {
  if (w.empty() || n < 1) fail(ErrorKind::domain, "periodic window needs a word and n >= 1");
  std::vector<double> v(2 * static_cast<std::size_t>(n));
  const long len = static_cast<long>(w.size());
  for (int l = -n; l < n; ++l) {
    long idx = l % len;
    if (idx < 0) idx += len;
    v[static_cast<std::size_t>(l + n)] = w[static_cast<std::size_t>(idx)];
  }
  return TwoSidedWindow(std::move(v));
}

double TwoSidedWindow::operator()(int l) const {
  if (l < -half_ || l >= half_) fail(ErrorKind::index, "window index out of range");
  return values_[static_cast<std::size_t>(l + half_)];
}

Mat2 two_sided_transfer(const TwoSidedWindow& window, double energy, int m) {
  if (m > window.half() || -m > window.half())
    fail(ErrorKind::index, "|m| exceeds the window half-length");
  Mat2 out = Mat2::identity();
  if (m >= 1) {
    for (int l = 0; l < m; ++l) out = schrodinger_step(energy, window(l)) * out;
  } else if (m <= -1) {
    // (A(m))^-1 ... (A(-1))^-1: A(-1)^-1 acts first.
    for (int l = -1; l >= m; --l) out = schrodinger_step_inverse(energy, window(l)) * out;
  }
  return out;
}

namespace {

struct DirSample {
  bool hyperbolic = false;
  double forward = 0.0;
  double backward = 0.0;
  // Gap labels of the forward and backward blocks: two energies lie in the
  // same hyperbolic component exactly when both labels agree.
  double forward_gap = 0.0;
  double backward_gap = 0.0;
};

Word block(const TwoSidedWindow& window, int lo, int hi) {
  std::vector<double> v;
  for (int l = lo; l < hi; ++l) v.push_back(window(l));
  return Word(std::move(v));
}

DirSample sample_directions(const TwoSidedWindow& window, double energy, int k1, int k2) {
  const Mat2 f = two_sided_transfer(window, energy, k1);
  const Mat2 b = two_sided_transfer(window, energy, -k2);
  if (classify(f) != Conjugacy::hyperbolic || classify(b) != Conjugacy::hyperbolic) return {};
  return {true, stable_direction(f).angle(), stable_direction(b).angle(),
          band_coordinate(block(window, 0, k1), energy), band_coordinate(block(window, -k2, 0), energy)};
}

constexpr double kMaxJump = kPi / 4;
constexpr int kMaxDepth = 40;

// Continues the lift (fa, ba) at ea to eb. Returns false when the segment
// leaves the hyperbolic region. A step is accepted only if the direct jump
// is small and agrees with the two half-steps, which guards against a
// coarse step aliasing a full turn.
bool lift_segment(const TwoSidedWindow& w, int k1, int k2, double ea, double fa, double ba,
                  double eb, const DirSample& sb, double& fb, double& bb, int depth,
                  std::size_t& refined) {
  const double df = wrap_half_pi(sb.forward - fa);
  const double db = wrap_half_pi(sb.backward - ba);
  const double em = 0.5 * (ea + eb);
  const DirSample sm = sample_directions(w, em, k1, k2);
  if (!sm.hyperbolic) return false;
  if (sm.forward_gap != sb.forward_gap || sm.backward_gap != sb.backward_gap) return false;
  const double df1 = wrap_half_pi(sm.forward - fa), db1 = wrap_half_pi(sm.backward - ba);
  const double df2 = wrap_half_pi(sb.forward - (fa + df1));
  const double db2 = wrap_half_pi(sb.backward - (ba + db1));
  const bool small = std::abs(df) <= kMaxJump && std::abs(db) <= kMaxJump && std::abs(df1) <= kMaxJump &&
                     std::abs(df2) <= kMaxJump && std::abs(db1) <= kMaxJump && std::abs(db2) <= kMaxJump;
  const bool consistent = std::abs(df1 + df2 - df) < 1e-9 && std::abs(db1 + db2 - db) < 1e-9;
  // Half-steps turning opposite ways by a visible amount usually mean a fast
  // turn was aliased; such cells are subdivided too.
  auto coherent = [](double a, double b) { return a * b >= 0.0 || std::max(std::abs(a), std::abs(b)) <= kPi / 64; };
  if (small && consistent && coherent(df1, df2) && coherent(db1, db2)) {
    fb = fa + df;
    bb = ba + db;
    return true;
  }
  if (depth >= kMaxDepth)
    fail(ErrorKind::refinement_needed,
         "direction lift not resolved near E=" + std::to_string(ea) + "; refine the grid");
  ++refined;
  double fm = 0, bm = 0;
  if (!lift_segment(w, k1, k2, ea, fa, ba, em, sm, fm, bm, depth + 1, refined)) return false;
  return lift_segment(w, k1, k2, em, fm, bm, eb, sb, fb, bb, depth + 1, refined);
}

}  // namespace

DirectionSignReport direction_derivative_signs(const TwoSidedWindow& window,
                                               const EnergyGrid& grid, int k1, int k2) {
  if (k1 < 1 || k2 < 1) fail(ErrorKind::domain, "k1, k2 must be >= 1");
  if (k1 > window.half() || k2 > window.half())
    fail(ErrorKind::index, "k exceeds the window half-length");

  DirectionSignReport report;
  report.grid_points = grid.size();
  report.sign_change_bound = 2 * static_cast<std::size_t>(std::max(k1, k2));

  const std::size_t n = grid.size();
  std::vector<DirSample> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = sample_directions(window, grid[i], k1, k2);

  // Lifted angles and the connected run each grid point belongs to.
  std::vector<double> fwd(n), bwd(n);
  std::vector<long> run(n, -1);
  long current = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!raw[i].hyperbolic) {
      report.skipped.push_back(grid[i]);
      continue;
    }
    ++report.retained;
    bool linked = false;
    if (i > 0 && raw[i - 1].hyperbolic && raw[i - 1].forward_gap == raw[i].forward_gap &&
        raw[i - 1].backward_gap == raw[i].backward_gap) {
      linked = lift_segment(window, k1, k2, grid[i - 1], fwd[i - 1], bwd[i - 1], grid[i], raw[i],
                            fwd[i], bwd[i], 0, report.refined_cells);
    }
    if (!linked) {
      ++current;
      fwd[i] = raw[i].forward;
      bwd[i] = raw[i].backward;
    }
    run[i] = current;
  }

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (run[i] < 0 || run[i - 1] != run[i] || run[i + 1] != run[i]) continue;
    const double h2 = grid[i + 1] - grid[i - 1];
    if ((fwd[i + 1] - fwd[i - 1]) / h2 <= 0.0) report.forward_violations.push_back(grid[i]);
    if ((bwd[i + 1] - bwd[i - 1]) / h2 >= 0.0) report.backward_violations.push_back(grid[i]);
  }

  for (std::size_t i = 1; i < n; ++i) {
    if (run[i] < 0 || run[i - 1] != run[i]) continue;
    const double d0 = std::floor((fwd[i - 1] - bwd[i - 1]) / kPi);
    const double d1 = std::floor((fwd[i] - bwd[i]) / kPi);
    report.sign_changes += static_cast<std::size_t>(std::abs(d1 - d0));
  }
  return report;
}

double lyapunov_estimate(const std::function<double(long)>& potential, double energy, long n) {
  if (n < 1) fail(ErrorKind::domain, "lyapunov_estimate needs n >= 1");
  TransferAccumulator acc;
  for (long j = 0; j < n; ++j) acc.push_step(energy, potential(j));
  return acc.value().log_norm() / static_cast<double>(n);
}

double lyapunov_estimate(const Word& w, double energy, long n) {
  if (w.empty()) fail(ErrorKind::domain, "lyapunov_estimate over empty word");
  const auto len = static_cast<long>(w.size());
  return lyapunov_estimate([&](long j) { return w[static_cast<std::size_t>(j % len)]; }, energy,
                           n);
}

GrowthFit fit_uniform_growth(const Word& w, double energy, int j_max) {
  if (j_max < 2) fail(ErrorKind::domain, "growth fit needs j_max >= 2");
  const ScaledMat2 one = transfer_scaled(w, energy);
  std::vector<double> xs, ys;
  Mat2 m = Mat2::identity();
  double log_scale = 0.0;
  for (int j = 1; j <= j_max; ++j) {
    m = one.m * m;
    log_scale += one.log_scale;
    const double nm = norm(m);
    m = m.scaled(1.0 / nm);
    log_scale += std::log(nm);
    xs.push_back(j);
    ys.push_back(log_scale);
  }
  const double k = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / k;
  GrowthFit fit{std::exp(intercept), std::exp(slope), 0.0};
  for (std::size_t i = 0; i < xs.size(); ++i)
    fit.max_residual = std::max(fit.max_residual, std::abs(ys[i] - intercept - slope * xs[i]));
  return fit;
}

}  // namespace sslab
