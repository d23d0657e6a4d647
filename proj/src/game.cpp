#include "edpc/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "edpc/numerics.hpp"

namespace edpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sign-correct residual for bracketing: below the queue floor the cost blows
// up, so the residual is effectively -inf there.
double residual_or_ninf(const LinkSpec& link, double p, double omega) {
  const double g = sinr_from_interference(link, p, omega);
  const double s = link.success.value(g);
  const double margin = s - link.success.arrival;
  if (!(margin > 0.0)) return -kInf;
  const double slope = link.success.deriv(g) * sinr_slope(link, p, omega);
  // (s/margin)^2, not s^2/margin^2: squaring first underflows to 0/0 for the
  // minuscule success values near p = 0.
  const double load = s / margin;
  return s / slope - p - link.rho * load * load - link.p_c_w;
}

// Smallest power with a stable queue, nudged off the pole.
double queue_guard(const LinkSpec& link, double omega) {
  const double p_q = floor_power(link, link.success.arrival, omega);
  return p_q * (1.0 + 1e-9) + 1e-300;
}

}  // namespace

double reconstruct_interference(const LinkSpec& link, double p, double gamma) {
  if (!(p > 0.0) || !(gamma > 0.0))
    throw std::domain_error("reconstruct_interference: needs p > 0 and gamma > 0");
  return link.coeffs.alpha * p / gamma - link.coeffs.phi * p;
}

double best_response_given_interference(const LinkSpec& link, double omega, QosPolicy qos) {
  const double p_max = link.p_max_w;
  const double guard = queue_guard(link, omega);

  double floor;
  if (qos == QosPolicy::enforce && link.theta > 0.0) {
    const double p_min = floor_power(link, link.theta, omega);
    if (p_min == kInf)
      throw InfeasibleBestResponse(InfeasibleBestResponse::Cause::saturated_below_target);
    if (!(p_min <= p_max))
      throw InfeasibleBestResponse(InfeasibleBestResponse::Cause::power_budget);
    floor = std::max(p_min, guard);
  } else {
    floor = guard;
  }
  if (!(floor <= p_max))
    throw InfeasibleBestResponse(InfeasibleBestResponse::Cause::queue_floor);

  // The residual increases strictly past the queue floor, so the endpoint signs
  // decide the clamp and bisection is only needed for an interior optimum.
  if (residual_or_ninf(link, p_max, omega) <= 0.0) return p_max;
  if (residual_or_ninf(link, floor, omega) >= 0.0) return floor;

  BisectOptions opt;
  opt.tol_x = std::max(1e-14 * p_max, 4e-300);
  return bisect([&](double p) { return residual_or_ninf(link, p, omega); }, floor, p_max, opt);
}

double local_best_response(const LinkSpec& link, double p, double gamma, QosPolicy qos) {
  return best_response_given_interference(link, reconstruct_interference(link, p, gamma), qos);
}

double best_response(const GameSpec& spec, std::size_t k, const PowerVector& p, QosPolicy qos) {
  return best_response_given_interference(spec.links[k],
                                          interference_plus_noise(spec, p, k), qos);
}

double stationary_power(const LinkSpec& link, double omega) {
  const double guard = queue_guard(link, omega);
  auto f = [&](double p) { return residual_or_ninf(link, p, omega); };
  if (f(guard) >= 0.0) return guard;
  const double hint = std::max(2.0 * guard, 1e-12);
  const double hi = expand_bracket(f, hint, kInf);
  BisectOptions opt;
  opt.tol_x = std::max(1e-14 * hi, 4e-300);
  return bisect(f, guard, hi, opt);
}

double concavity_margin(const SuccessModel& s, const std::vector<double>& grid) {
  return concavity_margin([&](double g) { return s.value(g); },
                          [&](double g) { return s.deriv(g); },
                          [&](double g) { return s.second_deriv(g); }, grid);
}

double concavity_margin(const std::function<double(double)>& value,
                        const std::function<double(double)>& deriv,
                        const std::function<double(double)>& second_deriv,
                        const std::vector<double>& grid) {
  double worst = -kInf;
  for (double g : grid) {
    const double s = value(g);
    const double s1 = deriv(g);
    const double s2 = second_deriv(g);
    worst = std::max(worst, s * s1 - g * s1 * s1 + g * s * s2);
  }
  return worst;
}

namespace {

std::vector<double> default_probe_grid() {
  std::vector<double> grid;
  grid.reserve(200);
  for (int i = 0; i < 200; ++i) grid.push_back(std::pow(10.0, -6.0 + 12.0 * i / 199.0));
  return grid;
}

double convergence_metric(const PowerVector& now, const PowerVector& before) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < now.size(); ++k) {
    const double d = now[k] - before[k];
    num += d * d;
    den += now[k] * now[k];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
  return num / den;
}

}  // namespace

SolveReport run_brd_perceived(const GameSpec& spec, const GameSpec& perceived,
                              const std::vector<double>& gamma_scale,
                              const PowerVector& start, const BrdConfig& cfg) {
  const std::size_t k_links = spec.size();
  if (start.size() != k_links || perceived.size() != k_links)
    throw std::invalid_argument("run_brd: size mismatch");
  if (!gamma_scale.empty() && gamma_scale.size() != k_links)
    throw std::invalid_argument("run_brd: gamma_scale size mismatch");
  for (std::size_t k = 0; k < k_links; ++k) {
    if (!(start[k] > 0.0) || !(start[k] <= spec.links[k].p_max_w) || !std::isfinite(start[k]))
      throw std::invalid_argument("run_brd: start must be strictly positive within the box");
  }

  SolveReport report;
  report.relaxed = (cfg.qos == QosPolicy::relax_to_zero);
  report.trace.push_back(start);

  const auto probe = default_probe_grid();
  report.concavity_margin = concavity_margin(spec.links[0].success, probe);
  report.concavity_ok = report.concavity_margin <= 1e-12;

  PowerVector p = start;
  std::vector<std::size_t> order(k_links);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    const PowerVector before = p;
    if (cfg.schedule == Schedule::randomized) std::shuffle(order.begin(), order.end(), rng);

    try {
      if (cfg.schedule == Schedule::synchronous) {
        PowerVector next = p;
        for (std::size_t k : order) {
          double gamma = sinr(spec, before, k);
          if (!gamma_scale.empty()) gamma *= gamma_scale[k];
          next[k] = local_best_response(perceived.links[k], before[k], gamma, cfg.qos);
        }
        p = next;
      } else {
        for (std::size_t k : order) {
          double gamma = sinr(spec, p, k);
          if (!gamma_scale.empty()) gamma *= gamma_scale[k];
          p[k] = local_best_response(perceived.links[k], p[k], gamma, cfg.qos);
        }
      }
    } catch (const InfeasibleBestResponse&) {
      report.termination = Termination::infeasible;
      report.rounds = round;
      break;
    }

    report.trace.push_back(p);
    report.rounds = round;
    report.final_metric = convergence_metric(p, before);
    if (report.final_metric <= cfg.epsilon) {
      report.termination = Termination::converged;
      break;
    }
  }

  report.powers = p;
  report.per_link_cost.resize(k_links);
  for (std::size_t k = 0; k < k_links; ++k)
    report.per_link_cost[k] = link_cost_or_inf(spec.links[k], p[k], sinr(spec, p, k));

  if (cfg.qos == QosPolicy::enforce) {
    for (std::size_t k = 0; k < k_links; ++k) {
      if (spec.links[k].theta <= 0.0) continue;
      const double s = spec.links[k].success.value(sinr(spec, p, k));
      if (std::abs(s - spec.links[k].theta) <= 1e-8) report.active_qos.push_back(k);
    }
  }
  return report;
}

SolveReport run_brd(const GameSpec& spec, const PowerVector& start, const BrdConfig& cfg) {
  return run_brd_perceived(spec, spec, {}, start, cfg);
}

EquilibriumCheck verify_equilibrium(const GameSpec& spec, const PowerVector& p, double tol) {
  EquilibriumCheck check;
  check.deviation_gain.resize(spec.size(), 0.0);
  check.is_equilibrium = true;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const LinkSpec& link = spec.links[k];
    const QosPolicy qos = link.theta > 0.0 ? QosPolicy::enforce : QosPolicy::relax_to_zero;
    const double omega = interference_plus_noise(spec, p, k);
    const double br = best_response_given_interference(link, omega, qos);
    const double cost_now = link_cost_or_inf(link, p[k], sinr_from_interference(link, p[k], omega));
    const double cost_br = link_cost_or_inf(link, br, sinr_from_interference(link, br, omega));
    const double gain = cost_now - cost_br;
    check.deviation_gain[k] = std::max(0.0, gain);
    if (check.deviation_gain[k] > tol) check.is_equilibrium = false;
  }
  return check;
}

}  // namespace edpc
