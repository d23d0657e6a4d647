#include "edpc/central.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edpc/numerics.hpp"

namespace edpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double common_rate(const GameSpec& spec) { return spec.links[0].success.rate_bps; }

// Per-link denominator split for one moving coordinate: everything except the
// p_k term is frozen, so each SINR is a one-variable rational function.
struct MovingLink {
  double num = 0.0;    // p_l * alpha_l (own link handled separately)
  double base = 0.0;   // denominator at p_k = 0
  double cross = 0.0;  // beta_{l,k}
};

struct BlockView {
  std::size_t k = 0;
  double omega_k = 0.0;              // interference at link k, constant in p_k
  double power_offset = 0.0;         // sum of the frozen powers plus all p_c
  std::vector<MovingLink> moving;    // entry k unused
};

BlockView make_block_view(const GameSpec& spec, const PowerVector& p, std::size_t k) {
  BlockView view;
  view.k = k;
  view.omega_k = interference_plus_noise(spec, p, k);
  for (std::size_t j = 0; j < spec.size(); ++j) {
    view.power_offset += spec.links[j].p_c_w;
    if (j != k) view.power_offset += p[j];
  }
  view.moving.resize(spec.size());
  for (std::size_t l = 0; l < spec.size(); ++l) {
    if (l == k) continue;
    const LinkCoefficients& c = spec.links[l].coeffs;
    MovingLink& m = view.moving[l];
    m.num = p[l] * c.alpha;
    m.cross = c.beta[k];
    m.base = c.sigma2_w + c.phi * p[l];
    for (std::size_t j = 0; j < spec.size(); ++j)
      if (j != l && j != k) m.base += p[j] * c.beta[j];
  }
  return view;
}

struct ResidualParts {
  double delay = 0.0;      // sum over links of rho * dS/dp / (S - arrival)^2
  double sum_s = 0.0;      // sum of success probabilities
  double sum_slope = 0.0;  // sum of dS/dp
};

ResidualParts residual_parts(const GameSpec& spec, const BlockView& view, double pk) {
  ResidualParts parts;
  for (std::size_t l = 0; l < spec.size(); ++l) {
    const LinkSpec& link = spec.links[l];
    double gamma, dgamma;
    if (l == view.k) {
      const double den = link.coeffs.phi * pk + view.omega_k;
      gamma = pk * link.coeffs.alpha / den;
      dgamma = link.coeffs.alpha * view.omega_k / (den * den);
    } else {
      const MovingLink& m = view.moving[l];
      const double den = m.base + m.cross * pk;
      gamma = m.num / den;
      dgamma = -m.num * m.cross / (den * den);
    }
    const double s = link.success.value(gamma);
    const double slope = link.success.deriv(gamma) * dgamma;
    const double margin = s - link.success.arrival;
    parts.delay += link.rho * slope / (margin * margin);
    parts.sum_s += s;
    parts.sum_slope += slope;
  }
  return parts;
}

double sum_residual_from(const GameSpec& spec, const BlockView& view, double pk) {
  const ResidualParts parts = residual_parts(spec, view, pk);
  const double k_links = static_cast<double>(spec.size());
  const double energy_term =
      (parts.sum_s - parts.sum_slope * (view.power_offset + pk)) / (parts.sum_s * parts.sum_s);
  return -parts.delay / k_links + energy_term;
}

double min_residual_from(const GameSpec& spec, const BlockView& view, double pk) {
  const ResidualParts parts = residual_parts(spec, view, pk);
  return (parts.sum_s - parts.sum_slope * (view.power_offset + pk)) / (parts.sum_s * parts.sum_s);
}

// Sign-scan grid strictly inside (lo, hi): geometric points resolve the small
// magnitudes, linear points the upper range.
std::vector<double> scan_grid(double lo, double hi, int n) {
  std::vector<double> grid;
  if (!(hi > lo) || n < 2) return grid;
  const int half = n / 2;
  const double g_lo = lo > 0.0 ? lo : hi * 1e-10;
  if (hi > g_lo) {
    const double ratio = hi / g_lo;
    for (int i = 1; i <= half; ++i) {
      const double v = g_lo * std::pow(ratio, static_cast<double>(i) / (half + 1));
      if (v > lo && v < hi) grid.push_back(v);
    }
  }
  for (int i = 1; i <= half; ++i) {
    const double v = lo + (hi - lo) * static_cast<double>(i) / (half + 1);
    if (v > lo && v < hi) grid.push_back(v);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<double> roots_by_scan(const ScalarFn& f, double lo, double hi, int n) {
  std::vector<double> roots;
  const std::vector<double> grid = scan_grid(lo, hi, n);
  if (grid.size() < 2) return roots;
  BisectOptions opt;
  opt.tol_x = std::max(1e-13 * hi, 4e-300);
  double prev_x = grid[0];
  double prev_f = f(prev_x);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double x = grid[i];
    const double fx = f(x);
    const bool crossing = (prev_f < 0.0 && fx >= 0.0) || (prev_f > 0.0 && fx <= 0.0) ||
                          (prev_f == 0.0 && fx != 0.0);
    if (crossing && std::isfinite(prev_f) && std::isfinite(fx)) {
      const double root = bisect(f, prev_x, x, opt);
      if (roots.empty() || root - roots.back() > 1e-12 * hi) roots.push_back(root);
    }
    prev_x = x;
    prev_f = fx;
  }
  return roots;
}

}  // namespace

double network_delay(const GameSpec& spec, const PowerVector& p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k)
    acc += delay_cost(spec.links[k], sinr(spec, p, k));
  return acc / static_cast<double>(spec.size());
}

double network_delay_or_inf(const GameSpec& spec, const PowerVector& p) {
  const double rate = common_rate(spec);
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const LinkSpec& link = spec.links[k];
    const double margin = link.success.value(sinr(spec, p, k)) - link.success.arrival;
    if (!(margin > 0.0)) return kInf;
    acc += 1.0 / margin;
  }
  return acc / (rate * static_cast<double>(spec.size()));
}

double network_energy(const GameSpec& spec, const PowerVector& p) {
  double sum_power = 0.0, sum_s = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    sum_power += p[k] + spec.links[k].p_c_w;
    sum_s += spec.links[k].success.value(sinr(spec, p, k));
  }
  if (sum_s <= 0.0) return kInf;
  return sum_power / (common_rate(spec) * sum_s);
}

namespace {

double weighted_delay_or_inf(const GameSpec& spec, const PowerVector& p) {
  const double rate = common_rate(spec);
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const LinkSpec& link = spec.links[k];
    const double margin = link.success.value(sinr(spec, p, k)) - link.success.arrival;
    if (!(margin > 0.0)) return kInf;
    acc += link.rho / margin;
  }
  return acc / (rate * static_cast<double>(spec.size()));
}

double worst_delay_or_inf(const GameSpec& spec, const PowerVector& p) {
  const double rate = common_rate(spec);
  double worst = kInf;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const LinkSpec& link = spec.links[k];
    const double margin = link.success.value(sinr(spec, p, k)) - link.success.arrival;
    if (!(margin > 0.0)) return kInf;
    worst = std::min(worst, margin);
  }
  return spec.links[0].rho / (rate * worst);
}

}  // namespace

double cost_sum(const GameSpec& spec, const PowerVector& p) {
  const double delay = weighted_delay_or_inf(spec, p);
  if (delay == kInf) throw QueueUnstable("cost_sum: some queue is unstable");
  return delay + network_energy(spec, p);
}

double cost_sum_or_inf(const GameSpec& spec, const PowerVector& p) {
  const double delay = weighted_delay_or_inf(spec, p);
  if (delay == kInf) return kInf;
  return delay + network_energy(spec, p);
}

double cost_min(const GameSpec& spec, const PowerVector& p) {
  const double delay = worst_delay_or_inf(spec, p);
  if (delay == kInf) throw QueueUnstable("cost_min: some queue is unstable");
  return delay + network_energy(spec, p);
}

double cost_min_or_inf(const GameSpec& spec, const PowerVector& p) {
  const double delay = worst_delay_or_inf(spec, p);
  if (delay == kInf) return kInf;
  return delay + network_energy(spec, p);
}

std::vector<double> success_slopes(const GameSpec& spec, const PowerVector& p, std::size_t k) {
  const BlockView view = make_block_view(spec, p, k);
  std::vector<double> slopes(spec.size());
  for (std::size_t l = 0; l < spec.size(); ++l) {
    const LinkSpec& link = spec.links[l];
    double gamma, dgamma;
    if (l == k) {
      const double den = link.coeffs.phi * p[k] + view.omega_k;
      gamma = p[k] * link.coeffs.alpha / den;
      dgamma = link.coeffs.alpha * view.omega_k / (den * den);
    } else {
      const MovingLink& m = view.moving[l];
      const double den = m.base + m.cross * p[k];
      gamma = m.num / den;
      dgamma = -m.num * m.cross / (den * den);
    }
    slopes[l] = link.success.deriv(gamma) * dgamma;
  }
  return slopes;
}

double sum_cost_residual(const GameSpec& spec, const PowerVector& p, std::size_t k) {
  return sum_residual_from(spec, make_block_view(spec, p, k), p[k]);
}

double min_cost_residual(const GameSpec& spec, const PowerVector& p, std::size_t k) {
  return min_residual_from(spec, make_block_view(spec, p, k), p[k]);
}

CentralReport maximum_block_improvement(const VecObjective& objective,
                                        const std::vector<BlockSolver>& blocks,
                                        std::vector<double> start, const MbiConfig& cfg) {
  CentralReport report;
  std::vector<double> x = std::move(start);
  double current = objective(x);
  report.objective_trace.push_back(current);
  report.state_trace.push_back(x);

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    int best_block = -1;
    double best_value = 0.0;
    double best_objective = current;
    std::vector<double> probe = x;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      std::optional<double> value;
      try {
        value = blocks[b](x);
      } catch (const AllCandidatesInfeasible&) {
        throw;
      } catch (const QueueUnstable&) {
        throw;
      } catch (const std::exception& e) {
        throw BlockSolverFailure(b, e.what());
      }
      if (!value) continue;
      probe[b] = *value;
      const double candidate = objective(probe);
      probe[b] = x[b];
      if (candidate < best_objective) {  // strict: ties resolve to the lowest index
        best_objective = candidate;
        best_block = static_cast<int>(b);
        best_value = *value;
      }
    }

    if (best_block < 0) {  // nothing improves: zero decrement, stop
      report.converged = true;
      break;
    }

    const double decrement = current - best_objective;
    x[static_cast<std::size_t>(best_block)] = best_value;
    current = best_objective;
    report.iters = iter;
    report.chosen_block.push_back(best_block);
    report.objective_trace.push_back(current);
    report.state_trace.push_back(x);
    if (decrement <= cfg.epsilon) {
      report.converged = true;
      break;
    }
  }

  report.state = x;
  report.powers = x;
  return report;
}

std::vector<double> stationary_points_sum(const GameSpec& spec, const PowerVector& p,
                                          std::size_t k, const MbiConfig& cfg) {
  const BlockView view = make_block_view(spec, p, k);
  const double hi = spec.links[k].p_max_w;
  return roots_by_scan([&](double pk) { return sum_residual_from(spec, view, pk); }, 0.0, hi,
                       cfg.grid_points);
}

double solve_block_sum(const GameSpec& spec, const PowerVector& p, std::size_t k,
                       const MbiConfig& cfg) {
  std::vector<double> candidates = stationary_points_sum(spec, p, k, cfg);
  candidates.push_back(0.0);
  candidates.push_back(spec.links[k].p_max_w);
  std::sort(candidates.begin(), candidates.end());

  PowerVector probe = p;
  double best = kInf, best_pk = 0.0;
  bool found = false;
  for (double c : candidates) {
    probe[k] = c;
    const double value = cost_sum_or_inf(spec, probe);
    if (value < best) {  // strict: ties resolve to the smallest power
      best = value;
      best_pk = c;
      found = true;
    }
  }
  if (!found) throw AllCandidatesInfeasible{};
  return best_pk;
}

double solve_block_t(const GameSpec& spec, const PowerVector& p) {
  double worst = kInf;
  for (std::size_t l = 0; l < spec.size(); ++l) {
    const LinkSpec& link = spec.links[l];
    worst = std::min(worst, link.success.value(sinr(spec, p, l)) - link.success.arrival);
  }
  if (!(worst > 0.0)) throw QueueUnstable("solve_block_t: some queue is unstable");
  return common_rate(spec) * worst;
}

std::optional<BlockWindow> block_window_min(const GameSpec& spec, const PowerVector& p,
                                            double t, std::size_t k) {
  const double rate = common_rate(spec);
  const LinkSpec& own = spec.links[k];

  const double own_target = t / rate + own.success.arrival;
  if (own_target >= 1.0) return std::nullopt;
  const double lo = floor_power(own, own_target, interference_plus_noise(spec, p, k));
  if (lo == kInf) return std::nullopt;

  double hi = own.p_max_w;
  for (std::size_t l = 0; l < spec.size(); ++l) {
    if (l == k) continue;
    const LinkSpec& other = spec.links[l];
    const double target = t / rate + other.success.arrival;
    if (target >= 1.0) return std::nullopt;
    if (target <= 0.0) continue;
    const double cross = other.coeffs.beta[k];
    if (cross <= 0.0) continue;
    const double b = other.success.inverse(target);
    double frozen = other.coeffs.sigma2_w + other.coeffs.phi * p[l];
    for (std::size_t j = 0; j < spec.size(); ++j)
      if (j != l && j != k) frozen += p[j] * other.coeffs.beta[j];
    // Keep link l's SINR at or above its threshold: own-power ceiling.
    const double ceiling = (other.coeffs.alpha * p[l] / b - frozen) / cross;
    hi = std::min(hi, ceiling);
  }
  if (!(lo <= hi)) return std::nullopt;
  return BlockWindow{lo, hi};
}

std::optional<double> solve_block_min(const GameSpec& spec, const PowerVector& p, double t,
                                      std::size_t k, const MbiConfig& cfg) {
  const std::optional<BlockWindow> window = block_window_min(spec, p, t, k);
  if (!window) return std::nullopt;

  const BlockView view = make_block_view(spec, p, k);
  std::vector<double> candidates =
      roots_by_scan([&](double pk) { return min_residual_from(spec, view, pk); }, window->lo,
                    window->hi, cfg.grid_points);
  candidates.push_back(window->lo);
  candidates.push_back(window->hi);
  std::sort(candidates.begin(), candidates.end());

  PowerVector probe = p;
  double best = kInf, best_pk = window->lo;
  for (double c : candidates) {
    probe[k] = c;
    const double value = network_energy(spec, probe);
    if (value < best) {
      best = value;
      best_pk = c;
    }
  }
  return best_pk;
}

double min_variant_objective(const GameSpec& spec, const PowerVector& p, double t) {
  return spec.links[0].rho / t + network_energy(spec, p);
}

double box_projected_residual(const VecObjective& objective, const std::vector<double>& x,
                              const std::vector<double>& lo, const std::vector<double>& hi) {
  double worst = 0.0;
  std::vector<double> probe = x;
  const double f0 = objective(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double width = hi[i] - lo[i];
    // The step follows the coordinate's own magnitude: a minimum sitting many
    // orders below the box width has local curvature at its own scale, and a
    // box-sized step would straddle it.  A zero coordinate falls back to the
    // box scale for the inward probe.
    const double scale = std::abs(x[i]) > 0.0 ? std::abs(x[i]) : std::max(width, 1e-6);
    const double h = 1e-6 * scale;

    double up = std::numeric_limits<double>::quiet_NaN();
    double dn = std::numeric_limits<double>::quiet_NaN();
    if (x[i] + h <= hi[i]) {
      probe[i] = x[i] + h;
      up = objective(probe);
    }
    if (x[i] - h >= lo[i]) {
      probe[i] = x[i] - h;
      dn = objective(probe);
    }
    probe[i] = x[i];

    // Prefer the central difference; drop to a one-sided one when a probe
    // leaves the box or lands on an infinite wall (e.g. below a queue floor).
    double grad;
    if (std::isfinite(up) && std::isfinite(dn)) {
      grad = (up - dn) / (2.0 * h);
    } else if (std::isfinite(up)) {
      grad = (up - f0) / h;
    } else if (std::isfinite(dn)) {
      grad = (f0 - dn) / h;
    } else {
      grad = 0.0;  // isolated at probe resolution; nothing to report
    }

    double residual;
    if (x[i] - lo[i] <= h) {
      residual = std::abs(std::min(grad, 0.0));  // pushing below the floor is fine
    } else if (hi[i] - x[i] <= h) {
      residual = std::abs(std::max(grad, 0.0));
    } else {
      residual = std::abs(grad);
    }
    worst = std::max(worst, residual);
  }
  return worst;
}

namespace {

std::vector<double> box_low(const GameSpec& spec) {
  return std::vector<double>(spec.size(), 0.0);
}

std::vector<double> box_high(const GameSpec& spec) {
  std::vector<double> hi(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) hi[k] = spec.links[k].p_max_w;
  return hi;
}

void check_start(const GameSpec& spec, const PowerVector& start) {
  if (start.size() != spec.size())
    throw std::invalid_argument("central solver: start size mismatch");
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (!(start[k] >= 0.0) || !(start[k] <= spec.links[k].p_max_w))
      throw std::invalid_argument("central solver: start outside the power box");
}

}  // namespace

CentralReport run_mbi_sum(const GameSpec& spec, const PowerVector& start, const MbiConfig& cfg) {
  check_start(spec, start);
  if (cost_sum_or_inf(spec, start) == kInf)
    throw QueueUnstable("run_mbi_sum: start leaves some queue unstable");

  std::vector<BlockSolver> blocks;
  blocks.reserve(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k)
    blocks.push_back([&spec, &cfg, k](const std::vector<double>& x) -> std::optional<double> {
      return solve_block_sum(spec, x, k, cfg);
    });

  CentralReport report = maximum_block_improvement(
      [&spec](const std::vector<double>& x) { return cost_sum_or_inf(spec, x); }, blocks, start,
      cfg);
  report.kkt_residual = box_projected_residual(
      [&spec](const std::vector<double>& x) { return cost_sum_or_inf(spec, x); }, report.powers,
      box_low(spec), box_high(spec));
  return report;
}

CentralReport run_mbi_min(const GameSpec& spec, const PowerVector& start, const MbiConfig& cfg) {
  check_start(spec, start);
  const std::size_t n = spec.size();
  const double t0 = solve_block_t(spec, start);  // throws if a queue is unstable

  std::vector<BlockSolver> blocks;
  blocks.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k)
    blocks.push_back([&spec, &cfg, k, n](const std::vector<double>& x) -> std::optional<double> {
      const PowerVector p(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
      return solve_block_min(spec, p, x[n], k, cfg);
    });
  blocks.push_back([&spec, n](const std::vector<double>& x) -> std::optional<double> {
    const PowerVector p(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    return solve_block_t(spec, p);
  });

  std::vector<double> state(start);
  state.push_back(t0);
  CentralReport report = maximum_block_improvement(
      [&spec, n](const std::vector<double>& x) {
        const PowerVector p(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
        return min_variant_objective(spec, p, x[n]);
      },
      blocks, state, cfg);

  report.powers.assign(report.state.begin(), report.state.end() - 1);
  report.final_t = report.state.back();
  report.t_trace.reserve(report.state_trace.size());
  for (const auto& s : report.state_trace) report.t_trace.push_back(s.back());
  report.kkt_residual = box_projected_residual(
      [&spec](const std::vector<double>& x) { return cost_min_or_inf(spec, x); }, report.powers,
      box_low(spec), box_high(spec));
  return report;
}

DinkelbachReport dinkelbach(const std::function<double(double)>& f,
                            const std::function<double(double)>& g,
                            const std::function<double(double)>& inner_argmin, double tol,
                            int max_iters) {
  DinkelbachReport report;
  double lambda = 0.0;
  for (int iter = 1; iter <= max_iters; ++iter) {
    const double x = inner_argmin(lambda);
    if (!std::isfinite(x)) throw InnerSolverFailure{};
    const double fx = f(x);
    const double gx = g(x);
    if (!(gx > 0.0)) throw NonpositiveDenominator{};
    const double gap = fx - lambda * gx;
    report.lambda_trace.push_back(lambda);
    report.gap_trace.push_back(gap);
    report.x = x;
    report.ratio = fx / gx;
    report.iters = iter;
    // The auxiliary minimum is nonpositive once lambda reaches any achieved
    // ratio and rises to zero exactly at the optimum, so convergence is
    // closeness to zero, not mere negativity.
    if (std::abs(gap) <= tol) {
      report.converged = true;
      break;
    }
    lambda = report.ratio;
  }
  return report;
}

}  // namespace edpc
