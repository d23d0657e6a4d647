#include "edpc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::invalid_argument(path + ": " + why);
}

}  // namespace

double SuccessModel::value(double sinr) const { return -std::expm1(-delta * sinr); }

double SuccessModel::deriv(double sinr) const { return delta * std::exp(-delta * sinr); }

double SuccessModel::second_deriv(double sinr) const {
  return -delta * delta * std::exp(-delta * sinr);
}

double SuccessModel::inverse(double y) const {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) throw std::domain_error("SuccessModel::inverse: target must be below 1");
  return -std::log1p(-y) / delta;
}

void SuccessModel::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) fail("success.delta", "must be positive");
  if (!(arrival >= 0.0 && arrival < 1.0)) fail("success.arrival", "must lie in [0, 1)");
  if (!(rate_bps > 0.0) || !std::isfinite(rate_bps)) fail("success.rate_bps", "must be positive");
}

SuccessProperties check_success_properties(const std::function<double(double)>& value,
                                           const std::vector<double>& grid) {
  SuccessProperties props;
  if (grid.size() < 3) return props;

  props.zero_at_origin = std::abs(value(0.0)) <= 1e-12;

  std::vector<double> s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) s[i] = value(grid[i]);

  // S(g)/g must fall below a vanishing fraction of its small-argument level.
  const double ratio_head = s.front() / grid.front();
  const double ratio_tail = s.back() / grid.back();
  props.vanishing_ratio = ratio_tail <= 1e-3 * std::max(ratio_head, 1e-300);

  // Saturating curves go exactly flat in double once increments drop below one
  // ulp of the supremum; ties are accepted only there. Any decrease, or a
  // plateau below the supremum, still fails.
  const double sup = *std::max_element(s.begin(), s.end());
  const double flat_tol = 16.0 * std::numeric_limits<double>::epsilon() *
                          std::max(std::abs(sup), 1e-300);
  props.strictly_increasing = s.back() > s.front();
  for (std::size_t i = 1; i < s.size(); ++i) {
    const bool saturated_tie = s[i] == s[i - 1] && s[i - 1] >= sup - flat_tol;
    if (!(s[i] > s[i - 1]) && !saturated_tie) {
      props.strictly_increasing = false;
      break;
    }
  }

  props.concave = true;
  for (std::size_t i = 2; i < s.size(); ++i) {
    const double left = (s[i - 1] - s[i - 2]) / (grid[i - 1] - grid[i - 2]);
    const double right = (s[i] - s[i - 1]) / (grid[i] - grid[i - 1]);
    if (right > left * (1.0 + 1e-9) + 1e-15) {
      props.concave = false;
      break;
    }
  }
  return props;
}

void GameSpec::validate() const {
  if (links.empty()) fail("links", "at least one link required");
  const std::size_t k_links = links.size();
  const double rate0 = links[0].success.rate_bps;
  for (std::size_t k = 0; k < k_links; ++k) {
    const std::string at = "links[" + std::to_string(k) + "]";
    const LinkSpec& l = links[k];
    l.success.validate();
    if (!(l.coeffs.alpha > 0.0)) fail(at + ".alpha", "must be positive");
    if (!(l.coeffs.phi >= 0.0)) fail(at + ".phi", "must be non-negative");
    if (!(l.coeffs.sigma2_w > 0.0)) fail(at + ".sigma2_w", "must be positive");
    if (l.coeffs.beta.size() != k_links)
      fail(at + ".beta", "needs one entry per link (own entry zero)");
    if (l.coeffs.beta[k] != 0.0) fail(at + ".beta", "own entry must be zero");
    for (std::size_t j = 0; j < k_links; ++j)
      if (!(l.coeffs.beta[j] >= 0.0) || !std::isfinite(l.coeffs.beta[j]))
        fail(at + ".beta[" + std::to_string(j) + "]", "must be finite and non-negative");
    if (!(l.p_max_w > 0.0)) fail(at + ".p_max_w", "must be positive");
    if (!(l.p_c_w >= 0.0)) fail(at + ".p_c_w", "must be non-negative");
    if (!(l.theta >= 0.0 && l.theta < 1.0)) fail(at + ".theta", "must lie in [0, 1)");
    if (l.theta > 0.0 && !(l.theta > l.success.arrival))
      fail(at + ".theta", "must exceed the arrival rate (queue stability)");
    if (!(l.rho > 0.0)) fail(at + ".rho", "must be positive");
    if (l.success.rate_bps != rate0)
      fail(at + ".success.rate_bps", "all links must share one rate");
  }
}

double interference_plus_noise(const GameSpec& spec, const PowerVector& p, std::size_t k) {
  const LinkCoefficients& c = spec.links[k].coeffs;
  double acc = c.sigma2_w;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (j != k) acc += p[j] * c.beta[j];
  return acc;
}

double sinr(const GameSpec& spec, const PowerVector& p, std::size_t k) {
  const LinkCoefficients& c = spec.links[k].coeffs;
  double den = c.sigma2_w + c.phi * p[k];
  for (std::size_t j = 0; j < p.size(); ++j)
    if (j != k) den += p[j] * c.beta[j];
  return p[k] * c.alpha / den;
}

double sinr_from_interference(const LinkSpec& link, double p, double omega) {
  return p * link.coeffs.alpha / (link.coeffs.phi * p + omega);
}

double delay_cost(const LinkSpec& link, double sinr_value) {
  const double s = link.success.value(sinr_value);
  if (!(s > link.success.arrival))
    throw QueueUnstable("delay_cost: success probability does not exceed the arrival rate");
  return 1.0 / (link.success.rate_bps * (s - link.success.arrival));
}

double energy_cost(const LinkSpec& link, double p, double sinr_value) {
  const double s = link.success.value(sinr_value);
  if (s <= 0.0) return kInf;
  return (p + link.p_c_w) / (link.success.rate_bps * s);
}

double link_cost(const LinkSpec& link, double p, double sinr_value) {
  return link.rho * delay_cost(link, sinr_value) + energy_cost(link, p, sinr_value);
}

double link_cost_or_inf(const LinkSpec& link, double p, double sinr_value) {
  const double s = link.success.value(sinr_value);
  if (!(s > link.success.arrival) || s <= 0.0) return kInf;
  return (link.rho / (s - link.success.arrival) + (p + link.p_c_w) / s) / link.success.rate_bps;
}

double floor_power(const LinkSpec& link, double target, double omega) {
  if (target <= 0.0) return 0.0;
  const double g = link.success.inverse(target);
  const double den = link.coeffs.alpha - g * link.coeffs.phi;
  if (!(den > 0.0)) return kInf;  // curve saturates below the target
  return g * omega / den;
}

double sinr_slope(const LinkSpec& link, double p, double omega) {
  const double den = link.coeffs.phi * p + omega;
  return link.coeffs.alpha * omega / (den * den);
}

double stationarity_residual(const LinkSpec& link, double p, double omega) {
  const double g = sinr_from_interference(link, p, omega);
  const double s = link.success.value(g);
  const double margin = s - link.success.arrival;
  if (!(margin > 0.0))
    throw std::domain_error("stationarity_residual: queue unstable at this power");
  const double slope = link.success.deriv(g) * sinr_slope(link, p, omega);
  // (s/margin)^2, not s^2/margin^2; see the best-response residual.
  const double load = s / margin;
  return s / slope - p - link.rho * load * load - link.p_c_w;
}

}  // namespace edpc
