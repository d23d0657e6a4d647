#include "edpc/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace edpc {

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

double bisect(const ScalarFn& f, double lo, double hi, const BisectOptions& opt) {
  if (!(lo <= hi)) throw std::invalid_argument("bisect: lo > hi");
  double flo = f(lo);
  double fhi = f(hi);
  if (std::isnan(flo) || std::isnan(fhi))
    throw std::invalid_argument("bisect: endpoint value is NaN");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (sign_of(flo) == sign_of(fhi)) throw NoSignChange{};
  double mid = lo;
  for (int it = 0; it < opt.max_iters; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval exhausted in doubles
    const double fm = f(mid);
    if (std::isnan(fm)) throw std::invalid_argument("bisect: f(x) is NaN inside the bracket");
    if (fm == 0.0) return mid;
    if (opt.tol_f > 0.0 && std::abs(fm) <= opt.tol_f) return mid;
    if (sign_of(fm) == sign_of(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= opt.tol_x) break;
  }
  return 0.5 * (lo + hi);
}

double expand_bracket(const ScalarFn& f, double hint, double cap, int max_doublings) {
  if (!(hint > 0.0)) throw std::invalid_argument("expand_bracket: hint must be positive");
  double hi = hint;
  for (int j = 0; j <= max_doublings; ++j) {
    if (hi > cap) throw ExpansionFailed("expand_bracket: cap exceeded before sign change");
    if (f(hi) > 0.0) return hi;
    hi *= 2.0;
  }
  throw ExpansionFailed("expand_bracket: no sign change after doubling limit");
}

namespace {

// xorshift-style generator: keeps the restart vectors deterministic without
// dragging <random> engine state semantics into the numeric layer.
double unit_from(std::uint64_t& s) {
  s ^= s << 13;
  s ^= s >> 7;
  s ^= s << 17;
  return 0.25 + 0.75 * static_cast<double>(s >> 11) * 0x1.0p-53;
}

}  // namespace

double spectral_radius(const DenseMatrix& m) {
  const std::size_t n = m.n;
  if (n == 0) return 0.0;
  for (double v : m.a) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("spectral_radius: entries must be finite and non-negative");
  }

  constexpr int kMaxIters = 100000;
  constexpr int kAttempts = 4;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;

  double best = 0.0;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::vector<double> x(n);
    if (attempt == 0) {
      x.assign(n, 1.0);
    } else {
      for (auto& v : x) v = unit_from(seed);
    }
    std::vector<double> y(n);
    double lambda = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    // Certified two-sided bounds: for any non-negative matrix a and positive x,
    // min_i (a x)_i / x_i <= rho(a) <= max_i (a x)_i / x_i. The best bounds seen
    // so far only improve, so once they pinch the root is known to that width.
    double lo_bound = 0.0;
    double hi_bound = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kMaxIters; ++it) {
      // y = (m + I) x; the unit shift keeps the iterate strictly positive.
      double dot_xy = 0.0, dot_xx = 0.0, norm = 0.0;
      double ratio_lo = std::numeric_limits<double>::infinity(), ratio_hi = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double acc = x[i];
        const double* row = &m.a[i * n];
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
        dot_xy += x[i] * acc;
        dot_xx += x[i] * x[i];
        norm = std::max(norm, std::abs(acc));
        const double ratio = acc / x[i];
        ratio_lo = std::min(ratio_lo, ratio);
        ratio_hi = std::max(ratio_hi, ratio);
      }
      lo_bound = std::max(lo_bound, ratio_lo);
      hi_bound = std::min(hi_bound, ratio_hi);
      if (hi_bound - lo_bound <= 1e-10 * hi_bound)
        return std::max(0.0, 0.5 * (lo_bound + hi_bound) - 1.0);
      lambda = dot_xy / dot_xx;  // Rayleigh quotient of the shifted matrix
      if (norm == 0.0) return 0.0;
      for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
      // Reducible patterns can leave the bounds stuck apart; fall back to
      // Rayleigh stagnation for those.
      if (std::abs(lambda - prev) <= 1e-13 * std::max(1.0, std::abs(lambda)))
        return std::max(0.0, lambda - 1.0);
      prev = lambda;
    }
    best = std::max(best, lambda - 1.0);  // stagnated: keep estimate, restart perturbed
  }
  return std::max(0.0, best);
}

std::vector<double> solve_linear(const DenseMatrix& a, const std::vector<double>& rhs) {
  const std::size_t n = a.n;
  if (rhs.size() != n) throw std::invalid_argument("solve_linear: size mismatch");
  DenseMatrix w = a;
  std::vector<double> b = rhs;

  double scale = 0.0;
  for (double v : w.a) scale = std::max(scale, std::abs(v));
  const double tiny = std::numeric_limits<double>::epsilon() * std::max(scale, 1.0) * n;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(w(r, col)) > std::abs(w(piv, col))) piv = r;
    if (std::abs(w(piv, col)) <= tiny) throw SingularSystem{};
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(w(piv, j), w(col, j));
      std::swap(b[piv], b[col]);
    }
    const double inv = 1.0 / w(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = w(r, col) * inv;
      if (factor == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) w(r, j) -= factor * w(col, j);
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= w(i, j) * x[j];
    x[i] = acc / w(i, i);
  }
  return x;
}

double central_diff(const ScalarFn& f, double x) {
  return central_diff(f, x, std::max(1e-6, 1e-6 * std::abs(x)));
}

double central_diff(const ScalarFn& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace edpc
