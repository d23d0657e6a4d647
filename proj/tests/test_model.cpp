#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "edpc/model.hpp"
#include "edpc/numerics.hpp"
#include "oracles.hpp"

using namespace edpc;

namespace {

// Two-link fixture with hand-picked round numbers so every expected value
// below can be recomputed on paper.
GameSpec two_link_fixture() {
  GameSpec spec;
  spec.links.resize(2);
  for (std::size_t k = 0; k < 2; ++k) {
    LinkSpec& l = spec.links[k];
    l.coeffs.beta.assign(2, 0.0);
    l.success.delta = 2.0;
    l.success.rate_bps = 1e6;
    l.p_max_w = 1.0;
    l.p_c_w = 0.05;
    l.rho = 1.0;
  }
  spec.links[0].coeffs.alpha = 4.0;
  spec.links[0].coeffs.phi = 0.5;
  spec.links[0].coeffs.beta[1] = 0.25;
  spec.links[0].coeffs.sigma2_w = 0.01;
  spec.links[1].coeffs.alpha = 3.0;
  spec.links[1].coeffs.phi = 0.1;
  spec.links[1].coeffs.beta[0] = 0.125;
  spec.links[1].coeffs.sigma2_w = 0.02;
  return spec;
}

}  // namespace

TEST_CASE("success curve values against the closed form") {
  SuccessModel s;
  s.delta = 2.0;
  CHECK(s.value(0.0) == 0.0);
  CHECK(s.value(1.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-15));
  CHECK(s.deriv(0.0) == 2.0);
  CHECK(s.deriv(1.5) == doctest::Approx(2.0 * std::exp(-3.0)).epsilon(1e-15));
  CHECK(s.second_deriv(1.5) == doctest::Approx(-4.0 * std::exp(-3.0)).epsilon(1e-15));
}

TEST_CASE("success curve keeps precision at the extremes") {
  SuccessModel s;
  s.delta = 1.0;
  // Tiny arguments: 1 - exp(-x) evaluated naively would lose all digits.
  CHECK(s.value(1e-15) == doctest::Approx(1e-15).epsilon(1e-12));
  // Near-one values: the inverse must resolve 1 - y far below double epsilon
  // of 1. A dyadic gap keeps the expected value exact.
  const double y = 1.0 - 0x1.0p-40;
  CHECK(s.inverse(y) == doctest::Approx(40.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("inverse round-trips the curve") {
  SuccessModel s;
  s.delta = 0.7;
  for (double y : {0.0, 1e-9, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-9}) {
    CHECK(s.value(s.inverse(y)) == doctest::Approx(y).epsilon(1e-12));
  }
  CHECK(s.inverse(0.0) == 0.0);
  CHECK(s.inverse(-0.1) == 0.0);  // no requirement, no power
  CHECK_THROWS_AS(s.inverse(1.0), std::domain_error);
}

TEST_CASE("analytic curve derivatives match finite differences") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    SuccessModel s;
    s.delta = testing::log_uniform(rng, 0.05, 20.0);
    const double g = testing::log_uniform(rng, 1e-3, 50.0 / s.delta);
    const auto value = [&](double x) { return s.value(x); };
    const auto deriv = [&](double x) { return s.deriv(x); };
    CHECK(s.deriv(g) == doctest::Approx(central_diff(value, g)).epsilon(1e-5));
    CHECK(s.second_deriv(g) == doctest::Approx(central_diff(deriv, g)).epsilon(1e-5));
  }
}

TEST_CASE("curve property probe accepts the exponential family") {
  const auto grid = testing::log_grid(1e-3, 1e5, 400);
  for (double delta : {0.1, 1.0, 10.0}) {
    SuccessModel s;
    s.delta = delta;
    const auto props = check_success_properties([&](double g) { return s.value(g); }, grid);
    CHECK(props.zero_at_origin);
    CHECK(props.vanishing_ratio);
    CHECK(props.strictly_increasing);
    CHECK(props.concave);
  }
}

TEST_CASE("curve property probe rejects broken candidates") {
  const auto grid = testing::log_grid(1e-3, 1e5, 400);
  // Offset at the origin.
  CHECK_FALSE(check_success_properties([](double g) { return 0.1 + g / (1.0 + g); }, grid)
                  .zero_at_origin);
  // Convex growth never vanishes relative to g.
  const auto convex = check_success_properties([](double g) { return g * g; }, grid);
  CHECK_FALSE(convex.concave);
  CHECK_FALSE(convex.vanishing_ratio);
  // A plateau below the supremum is not "strictly increasing".
  const auto plateau = check_success_properties(
      [](double g) { return g < 1.0 ? g : (g < 10.0 ? 1.0 : g / 10.0); }, grid);
  CHECK_FALSE(plateau.strictly_increasing);
  // The all-zero curve must not pass either.
  CHECK_FALSE(check_success_properties([](double) { return 0.0; }, grid).all());
}

TEST_CASE("spec validation names the offending field") {
  GameSpec spec = two_link_fixture();
  spec.links[1].theta = 1.0;
  CHECK_THROWS_WITH_AS(spec.validate(),
                       doctest::Contains("links[1]"), std::invalid_argument);

  spec = two_link_fixture();
  spec.links[0].coeffs.alpha = -1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = two_link_fixture();
  spec.links[0].coeffs.beta = {0.0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = two_link_fixture();
  spec.links[0].coeffs.beta[0] = 0.5;  // own column must stay zero
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = two_link_fixture();
  spec.links[1].success.rate_bps = 2e6;  // mixed rates break the shared cost units
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = two_link_fixture();
  spec.links[0].theta = 0.3;
  spec.links[0].success.arrival = 0.4;  // target below the arrival rate
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = two_link_fixture();
  CHECK_NOTHROW(spec.validate());

  spec.links.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("sinr spelled out by hand") {
  const GameSpec spec = two_link_fixture();
  const PowerVector p = {0.4, 0.8};
  // Link 0: 0.4*4 / (0.01 + 0.5*0.4 + 0.25*0.8)
  CHECK(sinr(spec, p, 0) == doctest::Approx(1.6 / 0.41).epsilon(1e-15));
  // Link 1: 0.8*3 / (0.02 + 0.1*0.8 + 0.125*0.4)
  CHECK(sinr(spec, p, 1) == doctest::Approx(2.4 / 0.15).epsilon(1e-15));
  CHECK(interference_plus_noise(spec, p, 0) == doctest::Approx(0.21).epsilon(1e-15));
}

TEST_CASE("the two sinr routes agree to rounding") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const GameSpec spec = testing::random_game(rng, 5);
    const PowerVector p = testing::random_powers(rng, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double direct = sinr(spec, p, k);
      const double split =
          sinr_from_interference(spec.links[k], p[k], interference_plus_noise(spec, p, k));
      CHECK(std::abs(direct - split) <= 1e-14 * direct);
    }
  }
}

TEST_CASE("cost pieces against hand arithmetic") {
  LinkSpec l;
  l.coeffs.beta.assign(1, 0.0);
  l.success.delta = 1.0;
  l.success.arrival = 0.2;
  l.success.rate_bps = 1e6;
  l.p_c_w = 0.05;
  l.rho = 2.0;
  const double g = 1.0;
  const double s = 1.0 - std::exp(-1.0);  // 0.63212
  CHECK(delay_cost(l, g) == doctest::Approx(1.0 / (1e6 * (s - 0.2))).epsilon(1e-14));
  CHECK(energy_cost(l, 0.3, g) == doctest::Approx(0.35 / (1e6 * s)).epsilon(1e-14));
  CHECK(link_cost(l, 0.3, g) ==
        doctest::Approx(2.0 / (1e6 * (s - 0.2)) + 0.35 / (1e6 * s)).epsilon(1e-14));
}

TEST_CASE("queue instability throws on the checked surface and saturates the other") {
  LinkSpec l;
  l.coeffs.beta.assign(1, 0.0);
  l.success.delta = 1.0;
  l.success.arrival = 0.5;
  l.success.rate_bps = 1e6;
  const double g_low = l.success.inverse(0.4);  // S < arrival
  CHECK_THROWS_AS(delay_cost(l, g_low), QueueUnstable);
  CHECK_THROWS_AS(link_cost(l, 0.1, g_low), QueueUnstable);
  CHECK(link_cost_or_inf(l, 0.1, g_low) == std::numeric_limits<double>::infinity());
  CHECK(energy_cost(l, 0.1, 0.0) == std::numeric_limits<double>::infinity());
  // Exactly at the boundary S == arrival the delay is already unbounded.
  CHECK_THROWS_AS(delay_cost(l, l.success.inverse(0.5)), QueueUnstable);

  const double g_ok = l.success.inverse(0.9);
  CHECK(link_cost(l, 0.1, g_ok) == link_cost_or_inf(l, 0.1, g_ok));
}

TEST_CASE("floor power reaches the target exactly") {
  const GameSpec spec = two_link_fixture();
  const LinkSpec& l = spec.links[0];
  for (double target : {0.1, 0.5, 0.9, 0.999}) {
    const double omega = 0.03;
    const double p = floor_power(l, target, omega);
    CHECK(l.success.value(sinr_from_interference(l, p, omega)) ==
          doctest::Approx(target).epsilon(1e-12));
  }
  CHECK(floor_power(l, 0.0, 0.03) == 0.0);
  CHECK(floor_power(l, -1.0, 0.03) == 0.0);
}

TEST_CASE("floor power saturates when the curve cannot reach the target") {
  LinkSpec l;
  l.coeffs.alpha = 1.0;
  l.coeffs.phi = 0.8;  // gamma is capped at alpha/phi = 1.25
  l.coeffs.beta.assign(1, 0.0);
  l.success.delta = 1.0;
  // Targets above S(1.25) need an unreachable sinr.
  const double cap = l.success.value(1.25);
  CHECK(floor_power(l, cap + 0.01, 0.01) == std::numeric_limits<double>::infinity());
  CHECK(floor_power(l, cap - 0.01, 0.01) < std::numeric_limits<double>::infinity());
}

TEST_CASE("sinr slope matches finite differences") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const GameSpec spec = testing::random_game(rng, 3);
    const LinkSpec& l = spec.links[0];
    const double omega = l.coeffs.sigma2_w * testing::uniform(rng, 1.0, 100.0);
    const double p = l.p_max_w * testing::uniform(rng, 0.1, 1.0);
    const double fd = central_diff([&](double x) { return sinr_from_interference(l, x, omega); },
                                   p, 1e-6 * p);
    CHECK(sinr_slope(l, p, omega) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("stationarity residual carries the scaled cost gradient") {
  // The residual equals R * S^2 / (S' * dgamma/dp) times the cost derivative
  // (the scale is positive), so the two vanish together and agree after
  // rescaling.
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    GameSpec spec = testing::random_game(rng, 3);
    LinkSpec& l = spec.links[0];
    l.success.arrival = trial % 2 == 0 ? 0.0 : 0.05;
    const double omega = l.coeffs.sigma2_w * testing::uniform(rng, 1.0, 30.0);
    // Stay on the stable side of the queue floor.
    const double p_stable = floor_power(l, l.success.arrival + 0.05, omega);
    const double p = std::min(std::max(p_stable * 2.0, 1e-6), l.p_max_w);

    const auto cost = [&](double x) {
      return link_cost(l, x, sinr_from_interference(l, x, omega));
    };
    const double g = sinr_from_interference(l, p, omega);
    const double s = l.success.value(g);
    const double slope = l.success.deriv(g) * sinr_slope(l, p, omega);
    const double scale = l.success.rate_bps * s * s / slope;
    const double from_fd = scale * central_diff(cost, p, 1e-6 * p);
    CHECK(stationarity_residual(l, p, omega) == doctest::Approx(from_fd).epsilon(1e-5));
  }
}

TEST_CASE("stationarity residual refuses unstable queues") {
  GameSpec spec = two_link_fixture();
  LinkSpec& l = spec.links[0];
  l.success.arrival = 0.5;
  // Power far below the queue floor.
  CHECK_THROWS_AS(stationarity_residual(l, 1e-9, 0.1), std::domain_error);
}
