#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "edpc/numerics.hpp"
#include "oracles.hpp"

using namespace edpc;

TEST_CASE("bisect finds an interior root to the interval tolerance") {
  const double root = bisect([](double x) { return std::cos(x); }, 0.0, 2.0);
  CHECK(std::abs(root - 1.5707963267948966) < 1e-11);
}

TEST_CASE("bisect returns exact endpoint roots without iterating") {
  const auto f = [](double x) { return x * (x - 3.0); };
  CHECK(bisect(f, 0.0, 2.0) == 0.0);
  CHECK(bisect(f, 1.0, 3.0) == 3.0);
}

TEST_CASE("bisect rejects brackets without a sign change") {
  CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0), NoSignChange);
}

TEST_CASE("bisect rejects NaN values loudly") {
  CHECK_THROWS_AS(bisect([](double) { return std::nan(""); }, 0.0, 1.0),
                  std::invalid_argument);
  // NaN inside the bracket, finite at the ends.
  const auto f = [](double x) { return x == 0.5 ? std::nan("") : x - 0.25; };
  CHECK_THROWS_AS(bisect(f, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("bisect accepts an infinite endpoint value as a sign") {
  // The best-response residual returns -inf below the queue floor; the root
  // must still be found.
  const auto f = [](double x) { return x < 0.1 ? -std::numeric_limits<double>::infinity()
                                                : x - 0.5; };
  CHECK(std::abs(bisect(f, 0.0, 1.0) - 0.5) < 1e-11);
}

TEST_CASE("bisect honors the residual tolerance early-out") {
  BisectOptions opt;
  opt.tol_f = 1e-3;
  int calls = 0;
  const auto f = [&](double x) {
    ++calls;
    return x - 0.3;
  };
  const double root = bisect(f, 0.0, 1.0, opt);
  CHECK(std::abs(root - 0.3) <= 1e-3);
  CHECK(calls < 20);
}

TEST_CASE("bisect is deterministic") {
  const auto f = [](double x) { return std::sin(x) - 0.123; };
  CHECK(bisect(f, 0.0, 1.0) == bisect(f, 0.0, 1.0));
}

TEST_CASE("expand_bracket doubles until the function turns positive") {
  CHECK(expand_bracket([](double x) { return x - 10.0; }, 1.0, 1e6) == 16.0);
  CHECK(expand_bracket([](double x) { return x - 0.5; }, 1.0, 1e6) == 1.0);
}

TEST_CASE("expand_bracket failure modes") {
  CHECK_THROWS_AS(expand_bracket([](double) { return -1.0; }, 1.0, 1e3), ExpansionFailed);
  CHECK_THROWS_AS(expand_bracket([](double) { return -1.0; }, 1.0, 1e300, 20),
                  ExpansionFailed);
  CHECK_THROWS_AS(expand_bracket([](double x) { return x; }, 0.0, 1e3),
                  std::invalid_argument);
}

TEST_CASE("spectral radius matches closed forms") {
  DenseMatrix zero(3);
  CHECK(spectral_radius(zero) == 0.0);

  DenseMatrix diag(3);
  diag(0, 0) = 0.3;
  diag(1, 1) = 1.7;
  diag(2, 2) = 0.9;
  CHECK(std::abs(spectral_radius(diag) - 1.7) < 1e-9);

  // Periodic pattern: eigenvalues +-sqrt(ab); the power iteration must not
  // oscillate on it.
  DenseMatrix per(2);
  per(0, 1) = 4.0;
  per(1, 0) = 9.0;
  CHECK(std::abs(spectral_radius(per) - 6.0) < 1e-8);

  DenseMatrix sym(2);
  sym(0, 0) = 2.0;
  sym(0, 1) = 1.0;
  sym(1, 0) = 1.0;
  sym(1, 1) = 2.0;
  CHECK(std::abs(spectral_radius(sym) - 3.0) < 1e-9);
}

TEST_CASE("spectral radius rejects negative and non-finite entries") {
  DenseMatrix m(2);
  m(0, 1) = -1.0;
  CHECK_THROWS_AS(spectral_radius(m), std::invalid_argument);
  m(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(spectral_radius(m), std::invalid_argument);
}

TEST_CASE("spectral radius agrees with an independent eigensolver") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    DenseMatrix m(n);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double v = i == j && trial % 3 == 0 ? 0.0 : testing::log_uniform(rng, 1e-4, 1.0);
        m(i, j) = v;
        e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      }
    const double oracle = e.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(std::abs(spectral_radius(m) - oracle) <= 1e-7 * std::max(1.0, oracle));
  }
}

TEST_CASE("solve_linear recovers a known solution") {
  DenseMatrix a(3);
  const double rows[3][3] = {{4, 1, 0}, {1, 3, 1}, {0, 1, 5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = rows[i][j];
  const std::vector<double> x_true = {1.0, -2.0, 0.5};
  std::vector<double> rhs(3, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rhs[i] += rows[i][j] * x_true[j];
  const std::vector<double> x = solve_linear(a, rhs);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(x[i] - x_true[i]) < 1e-12);
}

TEST_CASE("solve_linear pivots rows with a zero leading entry") {
  DenseMatrix a(2);
  a(0, 0) = 0.0;
  a(0, 1) = 1.0;
  a(1, 0) = 2.0;
  a(1, 1) = 1.0;
  const std::vector<double> x = solve_linear(a, {3.0, 5.0});
  CHECK(std::abs(x[0] - 1.0) < 1e-12);
  CHECK(std::abs(x[1] - 3.0) < 1e-12);
}

TEST_CASE("solve_linear reports singular systems") {
  DenseMatrix a(2);
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(1, 0) = 2.0;
  a(1, 1) = 4.0;
  CHECK_THROWS_AS(solve_linear(a, {1.0, 2.0}), SingularSystem);
}

TEST_CASE("central difference approximates smooth derivatives") {
  const auto f = [](double x) { return std::sin(x); };
  CHECK(std::abs(central_diff(f, 0.3) - std::cos(0.3)) < 1e-9);
  CHECK(std::abs(central_diff(f, 0.3, 1e-5) - std::cos(0.3)) < 1e-9);
  // Scale-aware step: the derivative of x^2 at a large argument.
  const auto g = [](double x) { return x * x; };
  CHECK(std::abs(central_diff(g, 1e6) - 2e6) < 1e-2);
}
