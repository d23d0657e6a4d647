#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edpc/scenario.hpp"

// Batch sweeps over power budgets and schemes, with per-run records that are
// enough to recompute every reported figure from the stored powers.

namespace edpc {

enum class Scheme {
  brd_qos,        // distributed, QoS enforced, relaxed on infeasibility
  brd_relaxed,    // distributed, QoS dropped from the start
  brd_perturbed,  // distributed under mis-estimated parameters, costed truthfully
  mbi_sum,        // centralized, average-cost objective
  mbi_min,        // centralized, bottleneck objective
};

std::string scheme_name(Scheme s);

struct ExperimentPlan {
  ScenarioConfig scenario;  // per-cell overrides below replace p_max/theta/rho
  std::vector<Scheme> schemes = {Scheme::brd_qos, Scheme::brd_relaxed, Scheme::mbi_sum,
                                 Scheme::mbi_min};
  std::vector<double> pmax_dbw = {-40.0, -30.0, -20.0, -10.0};
  std::vector<double> theta_levels = {1.0 - 1e-2, 1.0 - 1e-3};  // QoS schemes only
  std::vector<double> rho_levels = {1.0};
  int runs = 50;
  double perturbation = 0.30;  // parameter error fraction, brd_perturbed only
  std::uint64_t seed = 1;
};

struct RunRecord {
  std::string scheme;
  double theta = 0.0;
  double rho_js = 1.0;
  double pmax_dbw = 0.0;
  int run = 0;
  std::string status;  // converged | max_rounds | infeasible | unstable | error
  bool relaxed = false;
  int iterations = 0;
  double cost_sum_jpb = 0.0;
  double cost_min_jpb = 0.0;
  double energy_jpb = 0.0;
  double delay_spb = 0.0;
  double min_link_cost_jpb = 0.0;
  double max_link_cost_jpb = 0.0;
  double mean_power_w = 0.0;
  PowerVector powers_w;  // empty when the run produced no allocation
};

struct ExperimentResult {
  std::vector<RunRecord> rows;
};

// Runs the full grid serially and deterministically; failures become rows with
// a status, never an aborted sweep. Run r of every scheme/budget cell shares
// the same channel realization (seed + r), so schemes are paired.
ExperimentResult run_experiment(const ExperimentPlan& plan);

// Byte-stable CSV (fixed header, %.17g, '\n', powers ';'-joined) and its loader.
std::string to_csv(const ExperimentResult& result);
ExperimentResult from_csv(const std::string& text);

// Plain-text plotting script (python + matplotlib) regenerating the summary
// charts from the CSV.
std::string plot_script(const std::string& csv_path);

}  // namespace edpc
