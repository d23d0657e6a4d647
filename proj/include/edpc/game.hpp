#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "edpc/model.hpp"

// Distributed power control as a generalized game: each link picks the power
// minimizing its own delay/energy cost inside its QoS set, reacting only to
// the interference it can infer from its own measured SINR.

namespace edpc {

enum class QosPolicy {
  enforce,        // keep the success-probability constraint active
  relax_to_zero,  // drop it; only queue stability still binds
};

enum class Schedule {
  synchronous,  // everyone reacts to the same snapshot
  sequential,   // fixed order, in-place
  randomized,   // fresh random order every round, in-place
};

enum class Termination { converged, max_rounds, infeasible };

struct InfeasibleBestResponse : std::runtime_error {
  enum class Cause { saturated_below_target, power_budget, queue_floor };
  Cause cause;
  explicit InfeasibleBestResponse(Cause c)
      : std::runtime_error("best response infeasible"), cause(c) {}
};

struct BrdConfig {
  double epsilon = 1e-4;  // stop when ||p(n)-p(n-1)||^2 / ||p(n)||^2 <= epsilon
  int max_rounds = 500;
  Schedule schedule = Schedule::synchronous;
  QosPolicy qos = QosPolicy::enforce;
  std::uint64_t seed = 1;  // randomized schedule only
};

struct SolveReport {
  PowerVector powers;
  std::vector<double> per_link_cost;
  int rounds = 0;
  double final_metric = 0.0;
  Termination termination = Termination::max_rounds;
  std::vector<PowerVector> trace;    // trace[0] = start, then one entry per round
  std::vector<std::size_t> active_qos;  // links sitting exactly on their QoS floor
  bool concavity_ok = true;          // uniqueness precondition held on a probe grid
  double concavity_margin = 0.0;
  bool relaxed = false;              // ran with QosPolicy::relax_to_zero
};

// Interference inferred from the link's own measurement: alpha*p/gamma - phi*p.
// Needs p > 0 and gamma > 0 (a silent link reveals nothing).
double reconstruct_interference(const LinkSpec& link, double p, double gamma);

// Cost-minimizing power given fixed interference omega, clamped to
// [qos floor, p_max]. Throws InfeasibleBestResponse when the floor exceeds the
// budget (or, relaxed, when even queue stability needs more than p_max).
double best_response_given_interference(const LinkSpec& link, double omega,
                                        QosPolicy qos = QosPolicy::enforce);

// The per-link update path of the distributed iteration. Reads nothing beyond
// (link, own power, own measured SINR); in particular no other link's power.
double local_best_response(const LinkSpec& link, double p, double gamma,
                           QosPolicy qos = QosPolicy::enforce);

// Convenience wrapper computing omega from the joint power vector directly.
// Matches local_best_response through the measurement path to rounding.
double best_response(const GameSpec& spec, std::size_t k, const PowerVector& p,
                     QosPolicy qos = QosPolicy::enforce);

// Unclamped cost minimizer at fixed omega (root of the stationarity residual),
// found by geometric bracket expansion from just above the queue floor.
double stationary_power(const LinkSpec& link, double omega);

// Worst value over the grid of S*S' - g*S'^2 + g*S*S''. Non-positive everywhere
// is the curvature condition making the best response monotone in omega and the
// fixed point unique.
double concavity_margin(const SuccessModel& s, const std::vector<double>& grid);
double concavity_margin(const std::function<double(double)>& value,
                        const std::function<double(double)>& deriv,
                        const std::function<double(double)>& second_deriv,
                        const std::vector<double>& grid);

// Best-response dynamics. The start must be strictly positive and within the
// power box (use find_feasible_start under QosPolicy::enforce). A best-response
// infeasibility mid-run aborts with Termination::infeasible; callers decide
// whether to rerun relaxed.
SolveReport run_brd(const GameSpec& spec, const PowerVector& start, const BrdConfig& cfg);

// Same iteration, but the per-link updates see `perceived` coefficients and a
// per-link multiplicative SINR measurement error, while the network (and the
// reported costs) follow `spec`. Models parameter/measurement uncertainty;
// pass gamma_scale empty for exact measurements.
SolveReport run_brd_perceived(const GameSpec& spec, const GameSpec& perceived,
                              const std::vector<double>& gamma_scale,
                              const PowerVector& start, const BrdConfig& cfg);

struct EquilibriumCheck {
  bool is_equilibrium = false;
  std::vector<double> deviation_gain;  // cost drop available to each link, >= 0
};

// Verifies no link can lower its own cost by deviating (given the others).
EquilibriumCheck verify_equilibrium(const GameSpec& spec, const PowerVector& p,
                                    double tol);

}  // namespace edpc
