#include "edpc/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool saturation_ok(const LinkSpec& link) {
  if (link.theta <= 0.0) return true;
  const double g = link.success.inverse(link.theta);
  return link.coeffs.alpha - g * link.coeffs.phi > 0.0;
}

}  // namespace

SufficiencyReport check_sufficient(const GameSpec& spec) {
  SufficiencyReport report;
  report.links.resize(spec.size());
  report.all_ok = true;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const LinkSpec& link = spec.links[k];
    LinkSufficiency& row = report.links[k];
    row.saturation_ok = saturation_ok(link);

    double omega_wc = link.coeffs.sigma2_w;
    for (std::size_t j = 0; j < spec.size(); ++j)
      if (j != k) omega_wc += link.coeffs.beta[j] * spec.links[j].p_max_w;
    row.worst_case_floor_w = floor_power(link, link.theta, omega_wc);
    row.worst_case_ok = row.saturation_ok && row.worst_case_floor_w <= link.p_max_w;
    report.all_ok = report.all_ok && row.worst_case_ok;
  }
  return report;
}

BrFeasibility check_br_feasible(const GameSpec& spec, std::size_t k, const PowerVector& p) {
  const LinkSpec& link = spec.links[k];
  BrFeasibility out;
  if (!saturation_ok(link)) {
    out.required_power_w = kInf;
    out.cause = BrInfeasibleCause::saturated_below_target;
    return out;
  }
  out.required_power_w = floor_power(link, link.theta, interference_plus_noise(spec, p, k));
  if (out.required_power_w <= link.p_max_w) {
    out.feasible = true;
  } else {
    out.cause = BrInfeasibleCause::power_budget;
  }
  return out;
}

DenseMatrix coupling_matrix(const GameSpec& spec) {
  const std::size_t n = spec.size();
  DenseMatrix f(n);
  for (std::size_t k = 0; k < n; ++k) {
    const LinkSpec& link = spec.links[k];
    if (link.theta <= 0.0) continue;  // row stays zero: no QoS coupling
    const double g = link.success.inverse(link.theta);
    const double den = link.coeffs.alpha - g * link.coeffs.phi;
    if (!(den > 0.0))
      throw std::domain_error("coupling_matrix: a link saturates below its target");
    for (std::size_t j = 0; j < n; ++j)
      if (j != k) f(k, j) = link.coeffs.beta[j] * g / den;
  }
  return f;
}

std::vector<double> coupling_offset(const GameSpec& spec) {
  std::vector<double> s(spec.size(), 0.0);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const LinkSpec& link = spec.links[k];
    if (link.theta <= 0.0) continue;
    const double g = link.success.inverse(link.theta);
    const double den = link.coeffs.alpha - g * link.coeffs.phi;
    if (!(den > 0.0))
      throw std::domain_error("coupling_offset: a link saturates below its target");
    s[k] = link.coeffs.sigma2_w * g / den;
  }
  return s;
}

FeasibilityReport check_necessary(const GameSpec& spec) {
  FeasibilityReport report;
  report.sufficient_ok = check_sufficient(spec).all_ok;

  for (const LinkSpec& link : spec.links) {
    if (!saturation_ok(link)) {
      report.coupling_radius = kInf;
      return report;  // target unreachable regardless of power
    }
  }

  const DenseMatrix f = coupling_matrix(spec);
  report.coupling_radius = spectral_radius(f);
  if (!(report.coupling_radius < 1.0)) return report;  // QoS targets feed on each other

  DenseMatrix system(f.n);
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t j = 0; j < f.n; ++j)
      system(i, j) = (i == j ? 1.0 : 0.0) - f(i, j);
  report.min_power_vector = solve_linear(system, coupling_offset(spec));
  for (auto& v : report.min_power_vector) v = std::max(v, 0.0);  // shed solver roundoff

  report.per_link_margin.resize(spec.size());
  report.necessary_ok = true;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    report.per_link_margin[k] = spec.links[k].p_max_w - report.min_power_vector[k];
    if (report.per_link_margin[k] < 0.0) report.necessary_ok = false;
  }
  return report;
}

std::optional<PowerVector> find_feasible_start(const GameSpec& spec) {
  const SufficiencyReport sufficient = check_sufficient(spec);
  if (sufficient.all_ok) {
    PowerVector p(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) p[k] = spec.links[k].p_max_w;
    return p;
  }

  // The scaled fixed point only makes sense when every link has a live target.
  for (const LinkSpec& link : spec.links)
    if (link.theta <= 0.0) return std::nullopt;

  const FeasibilityReport report = check_necessary(spec);
  if (!report.necessary_ok) return std::nullopt;

  PowerVector p = report.min_power_vector;
  for (std::size_t k = 0; k < spec.size(); ++k)
    p[k] = std::min(p[k] * 1.001, spec.links[k].p_max_w);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (!(p[k] > 0.0)) return std::nullopt;
    if (!check_br_feasible(spec, k, p).feasible) return std::nullopt;
  }
  return p;
}

}  // namespace edpc
