#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

// Small dense numeric kernels used across the solvers. Everything here is
// deterministic: same inputs, same bits.

namespace edpc {

struct NoSignChange : std::runtime_error {
  NoSignChange() : std::runtime_error("bisect: no sign change over bracket") {}
};

struct ExpansionFailed : std::runtime_error {
  explicit ExpansionFailed(const std::string& what) : std::runtime_error(what) {}
};

struct SingularSystem : std::runtime_error {
  SingularSystem() : std::runtime_error("solve_linear: singular matrix") {}
};

using ScalarFn = std::function<double(double)>;

struct BisectOptions {
  double tol_x = 1e-12;   // absolute interval width target
  double tol_f = 0.0;     // early-out on |f| <= tol_f (0 disables)
  int max_iters = 200;    // 2^-200 leaves nothing to halve in a double
};

// Root of f on [lo, hi]; requires a sign change (endpoints count as roots).
// Throws NoSignChange otherwise.
double bisect(const ScalarFn& f, double lo, double hi, const BisectOptions& opt = {});

// Grows hi = hint * 2^j until f(hi) > 0, starting from j = 0. The residuals this
// serves are strictly increasing and negative near lo, so only the upper end moves.
// Throws ExpansionFailed after max_doublings or when hi would exceed cap.
double expand_bracket(const ScalarFn& f, double hint, double cap, int max_doublings = 200);

// Row-major dense matrix, square unless stated otherwise.
struct DenseMatrix {
  std::size_t n = 0;
  std::vector<double> a;  // n*n, a[i*n+j]

  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// Perron root of an entrywise non-negative matrix via power iteration on m + I
// (the shift keeps the iteration convergent for periodic patterns such as
// [[0,a],[b,0]]). Deterministic positive start; Rayleigh-quotient stopping at
// 1e-10 relative, restart with a perturbed vector on stagnation, at most 1e4
// iterations per attempt. Throws std::invalid_argument on negative/non-finite
// entries.
double spectral_radius(const DenseMatrix& m);

// Solves a x = rhs by partial-pivot elimination. Throws SingularSystem.
std::vector<double> solve_linear(const DenseMatrix& a, const std::vector<double>& rhs);

// Symmetric difference quotient with h = max(1e-6, 1e-6*|x|).
double central_diff(const ScalarFn& f, double x);
double central_diff(const ScalarFn& f, double x, double h);

}  // namespace edpc
