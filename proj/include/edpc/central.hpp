#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "edpc/model.hpp"

// Centralized benchmarks: network-wide cost minimization by maximum block
// improvement (solve every scalar block from the current point, commit only the
// best one), plus the ratio-minimization utility used by the energy-style
// objectives.

namespace edpc {

struct AllCandidatesInfeasible : std::runtime_error {
  AllCandidatesInfeasible()
      : std::runtime_error("block solve: every candidate has unstable queues") {}
};

struct NonpositiveDenominator : std::runtime_error {
  NonpositiveDenominator()
      : std::runtime_error("ratio minimization: denominator must stay positive") {}
};

struct InnerSolverFailure : std::runtime_error {
  InnerSolverFailure() : std::runtime_error("ratio minimization: inner solver failed") {}
};

struct BlockSolverFailure : std::runtime_error {
  std::size_t block;
  BlockSolverFailure(std::size_t b, const std::string& what)
      : std::runtime_error("block " + std::to_string(b) + ": " + what), block(b) {}
};

// Network delay: average of the per-link delays, s.
double network_delay(const GameSpec& spec, const PowerVector& p);   // throws QueueUnstable
double network_delay_or_inf(const GameSpec& spec, const PowerVector& p);

// Network energy per delivered bit: (sum p + sum p_c)/(R * sum S), J/bit.
double network_energy(const GameSpec& spec, const PowerVector& p);

// Sum scalarization: weighted average delay plus network energy.
double cost_sum(const GameSpec& spec, const PowerVector& p);        // throws QueueUnstable
double cost_sum_or_inf(const GameSpec& spec, const PowerVector& p);

// Bottleneck scalarization: worst-link delay plus network energy.
double cost_min(const GameSpec& spec, const PowerVector& p);        // throws QueueUnstable
double cost_min_or_inf(const GameSpec& spec, const PowerVector& p);

// d S_l / d p_k for every l, at the given point (analytic).
std::vector<double> success_slopes(const GameSpec& spec, const PowerVector& p, std::size_t k);

// Scaled partial derivative of cost_sum in p_k (rate factor dropped; zero set
// unchanged). Roots are the interior stationary candidates of the sum block.
double sum_cost_residual(const GameSpec& spec, const PowerVector& p, std::size_t k);

// Partial derivative of the energy ratio (sum p + p_c)/(sum S) in p_k; the
// bottleneck variant's per-block objective at fixed worst-case delay.
double min_cost_residual(const GameSpec& spec, const PowerVector& p, std::size_t k);

struct MbiConfig {
  double epsilon = 1e-6;  // stop when the best block improves the objective by less
  int max_iters = 2000;
  int grid_points = 512;  // sign-scan density for stationary-point hunting
};

struct CentralReport {
  std::vector<double> state;            // final block values (powers, plus t for the
                                        // bottleneck variant)
  PowerVector powers;                   // power part of the state
  std::vector<double> objective_trace;  // [0] = start, then one entry per iteration
  std::vector<int> chosen_block;        // block committed at each iteration
  std::vector<std::vector<double>> state_trace;
  std::vector<double> t_trace;          // bottleneck variant only
  double final_t = 0.0;
  double kkt_residual = 0.0;            // box-projected gradient norm at the end
  int iters = 0;
  bool converged = false;
};

using VecObjective = std::function<double(const std::vector<double>&)>;
// Returns the block's new value, or nullopt when the block cannot move (its
// feasible interval is empty or pinned).
using BlockSolver = std::function<std::optional<double>(const std::vector<double>&)>;

// Maximum block improvement over scalar blocks: every iteration solves all
// blocks from the current point, commits the one with the largest objective
// decrease (ties to the lowest index), and stops once the decrease falls to
// epsilon. The trace never increases; a best candidate that fails to improve
// ends the run instead of being committed.
CentralReport maximum_block_improvement(const VecObjective& objective,
                                        const std::vector<BlockSolver>& blocks,
                                        std::vector<double> start, const MbiConfig& cfg);

// Interior stationary candidates of the sum cost in p_k over (0, p_max), by
// sign scan on a log+linear grid plus bisection.
std::vector<double> stationary_points_sum(const GameSpec& spec, const PowerVector& p,
                                          std::size_t k, const MbiConfig& cfg = {});

// Best value of block k for the sum cost: argmin over {0, p_max} and the
// stationary candidates. Throws AllCandidatesInfeasible when every candidate
// leaves some queue unstable.
double solve_block_sum(const GameSpec& spec, const PowerVector& p, std::size_t k,
                       const MbiConfig& cfg = {});

// Tight worst-link delay block: t = R * min_l (S_l - arrival_l).
double solve_block_t(const GameSpec& spec, const PowerVector& p);

// Feasible power window for block k at fixed t (every link's delay constraint
// rewritten as a floor on own power and ceilings from the others).
struct BlockWindow {
  double lo = 0.0;
  double hi = 0.0;
};
std::optional<BlockWindow> block_window_min(const GameSpec& spec, const PowerVector& p,
                                            double t, std::size_t k);

// Best value of block k for the bottleneck variant at fixed t; nullopt when the
// feasible window is empty (a later t move can reopen it).
std::optional<double> solve_block_min(const GameSpec& spec, const PowerVector& p, double t,
                                      std::size_t k, const MbiConfig& cfg = {});

// Full solvers. Start must be inside the box with all queues stable.
CentralReport run_mbi_sum(const GameSpec& spec, const PowerVector& start,
                          const MbiConfig& cfg = {});
CentralReport run_mbi_min(const GameSpec& spec, const PowerVector& start,
                          const MbiConfig& cfg = {});

// Objective the bottleneck solver actually descends: rho/t + network energy.
// Equals cost_min exactly whenever t sits at its block optimum.
double min_variant_objective(const GameSpec& spec, const PowerVector& p, double t);

// Box-projected finite-difference gradient residual: max over coordinates of
// |grad| interior, |min(grad,0)| at the lower bound, |max(grad,0)| at the upper.
double box_projected_residual(const VecObjective& objective, const std::vector<double>& x,
                              const std::vector<double>& lo, const std::vector<double>& hi);

struct DinkelbachReport {
  double x = 0.0;
  double ratio = 0.0;
  int iters = 0;
  std::vector<double> lambda_trace;  // one initial jump from 0, then non-increasing
  std::vector<double> gap_trace;     // auxiliary value, |gap| <= tol at the end
  bool converged = false;
};

// Ratio minimization min f/g via the parametric auxiliary problem
// min f - lambda*g: the inner solver returns that argmin for a given lambda.
// Starts at lambda = 0; requires f >= 0 and g > 0 on the feasible set.
DinkelbachReport dinkelbach(const std::function<double(double)>& f,
                            const std::function<double(double)>& g,
                            const std::function<double(double)>& inner_argmin,
                            double tol = 1e-10, int max_iters = 100);

}  // namespace edpc
