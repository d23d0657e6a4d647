#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace edpc {

// Thrown by the checked cost entry points when the service rate cannot keep up
// with arrivals (success probability <= arrival rate). Solvers use the *_or_inf
// variants instead and treat +inf as worse than everything.
struct QueueUnstable : std::runtime_error {
  explicit QueueUnstable(const std::string& what) : std::runtime_error(what) {}
};

// Per-slot success probability 1 - exp(-delta * sinr), plus the queue/rate
// parameters that always travel with it. Concave, increasing, 0 at 0.
struct SuccessModel {
  double delta = 1.0;     // exponent slope, > 0
  double arrival = 0.0;   // packet arrival probability per slot, in [0, 1)
  double rate_bps = 1.0;  // transmission rate, bit/s

  double value(double sinr) const;
  double deriv(double sinr) const;
  double second_deriv(double sinr) const;
  // Inverse of value on [0, 1); y <= 0 maps to 0, y >= 1 is a domain error.
  double inverse(double y) const;

  void validate() const;  // parameter ranges only; curve shape is by construction
};

// Result of probing a success-curve candidate on a grid. Any implementation
// swapped in for SuccessModel must keep all four flags true.
struct SuccessProperties {
  bool zero_at_origin = false;       // S(0) = 0
  bool vanishing_ratio = false;      // S(g)/g -> 0 as g grows
  bool strictly_increasing = false;  // S' > 0
  bool concave = false;              // S'' <= 0 (via second differences)
  bool all() const {
    return zero_at_origin && vanishing_ratio && strictly_increasing && concave;
  }
};

// Grid check over arbitrary callables so alternative curves can be vetted
// without inheriting from anything. Grid must be positive and increasing.
SuccessProperties check_success_properties(const std::function<double(double)>& value,
                                           const std::vector<double>& grid);

struct LinkCoefficients {
  double alpha = 0.0;        // effective direct-channel gain
  double phi = 0.0;          // self-interference gain (>= 0)
  std::vector<double> beta;  // cross gains at this link's receiver, own index 0
  double sigma2_w = 0.0;     // noise power at the receiver, W
};

struct LinkSpec {
  LinkCoefficients coeffs;
  SuccessModel success;
  double p_max_w = 1.0;  // transmit power budget, W
  double p_c_w = 0.0;    // static circuit power, W
  double theta = 0.0;    // success-probability requirement, in [0, 1)
  double rho = 1.0;      // delay weight in the scalarized cost, J/s
};

struct GameSpec {
  std::vector<LinkSpec> links;

  std::size_t size() const { return links.size(); }
  // Throws std::invalid_argument with a field path on the first violation.
  void validate() const;
};

using PowerVector = std::vector<double>;

// Noise-plus-interference seen by link k's receiver, excluding the self term:
// sigma2 + sum_{j != k} p_j * beta_{k,j}.
double interference_plus_noise(const GameSpec& spec, const PowerVector& p, std::size_t k);

// SINR with the full denominator spelled out (noise + self-interference + cross).
double sinr(const GameSpec& spec, const PowerVector& p, std::size_t k);

// Same quantity through the two-term split p*alpha / (phi*p + uplink_noise);
// agrees with sinr() to rounding.
double sinr_from_interference(const LinkSpec& link, double p, double omega);

// Mean packet delay 1/(R*(S - arrival)), s. Throws QueueUnstable when S <= arrival.
double delay_cost(const LinkSpec& link, double sinr_value);

// Energy per successfully delivered bit (p + p_c)/(R*S), J/bit. Returns +inf at
// S = 0 rather than throwing: a zero-power link just has unusable efficiency.
double energy_cost(const LinkSpec& link, double p, double sinr_value);

// Scalarized per-link cost rho*delay + energy. Checked variant throws
// QueueUnstable; the _or_inf variant returns +inf instead (for comparisons
// inside solvers).
double link_cost(const LinkSpec& link, double p, double sinr_value);
double link_cost_or_inf(const LinkSpec& link, double p, double sinr_value);

// Power at which the success probability reaches `target` given fixed
// interference omega: S^-1(target)*omega/(alpha - phi*S^-1(target)).
// Returns 0 for target <= 0 and +inf when the curve saturates below the target
// (denominator <= 0).
double floor_power(const LinkSpec& link, double target, double omega);

// Stationarity residual of the per-link cost at fixed interference omega:
//   S/(S' * dgamma/dp) - p - rho*S^2/(S - arrival)^2 - p_c.
// Strictly increasing in p beyond the queue-stability floor, negative below the
// cost minimizer and positive above it; its root is the unclamped best power.
// Throws std::domain_error when the queue is not stable at p.
double stationarity_residual(const LinkSpec& link, double p, double omega);

// dgamma/dp at fixed omega: alpha*omega/(phi*p + omega)^2.
double sinr_slope(const LinkSpec& link, double p, double omega);

}  // namespace edpc
