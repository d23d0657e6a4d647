#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "edpc/model.hpp"
#include "edpc/numerics.hpp"

// Can every link meet its success-probability target inside its power budget?
// Three tiers: a worst-case-interference sufficient test (cheap, conservative),
// a per-link test against the actual interference, and a network-wide
// necessary-and-sufficient test built on the linear coupling of the tight-QoS
// fixed point.

namespace edpc {

struct LinkSufficiency {
  bool saturation_ok = false;   // target reachable at all: alpha > S^-1(theta)*phi
  bool worst_case_ok = false;   // budget covers the floor even under full-power interference
  double worst_case_floor_w = 0.0;
};

struct SufficiencyReport {
  std::vector<LinkSufficiency> links;
  bool all_ok = false;
};

SufficiencyReport check_sufficient(const GameSpec& spec);

enum class BrInfeasibleCause { none, saturated_below_target, power_budget };

struct BrFeasibility {
  bool feasible = false;
  double required_power_w = 0.0;  // QoS floor given the others' current powers
  BrInfeasibleCause cause = BrInfeasibleCause::none;
};

// Feasibility of link k's best response against the interference produced by
// the given joint powers (own entry ignored).
BrFeasibility check_br_feasible(const GameSpec& spec, std::size_t k, const PowerVector& p);

struct FeasibilityReport {
  bool sufficient_ok = false;
  bool necessary_ok = false;
  double coupling_radius = 0.0;    // Perron root of the QoS coupling matrix
  PowerVector min_power_vector;    // simultaneous tight-QoS powers; empty if unattainable
  std::vector<double> per_link_margin;  // p_max - required, same emptiness rule
};

// Linear coupling of the tight-QoS fixed point: row k holds
// beta_{k,j} * S_k^-1(theta_k) / (alpha_k - phi_k * S_k^-1(theta_k)), zero
// diagonal. Exposed so tests can cross-check the solve against fixed-point
// iteration. Requires saturation_ok on every link.
DenseMatrix coupling_matrix(const GameSpec& spec);
std::vector<double> coupling_offset(const GameSpec& spec);  // noise-driven floors

// Network-wide check: coupling radius below one and the fixed-point powers
// within every budget. The report also carries the sufficient-test verdict so
// the implication sufficient => necessary is visible in one place.
FeasibilityReport check_necessary(const GameSpec& spec);

// A strictly positive start satisfying every link's QoS floor: the full-power
// vector when the worst-case test passes, otherwise the tight-QoS fixed point
// scaled up 0.1% and clipped (then re-verified link by link). nullopt when the
// game admits no such point.
std::optional<PowerVector> find_feasible_start(const GameSpec& spec);

}  // namespace edpc
