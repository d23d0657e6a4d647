#pragma once

#include <cstdint>
#include <vector>

#include "edpc/model.hpp"

// Synthetic multi-cell uplink instances. Cells sit on a near-square grid of
// squares with the base station at each center; users drop uniformly in their
// cell. Coefficients come from a documented surrogate channel model:
//   g        = 10^(-pathloss_ref_db/10) * d^(-pathloss_exp) * |h|^2,  |h|^2 ~ Exp(1)
//   alpha_k  = N * g_kk * (1 - tau^2) * (1 - eps^2)     (array gain on the direct link)
//   phi_k    = g_kk * (tau^2 + eps^2)                   (self-interference leakage)
//   beta_kj  = g_kj * (1/N + tau^2 + eps^2)             (residual cross interference
//                                                        after combining)
//   sigma2   = noise_figure * bandwidth * noise_psd     (all linear)
// tau is the channel-estimation error coefficient, eps the hardware-impairment
// coefficient. The success-curve slope is fitted so 1 - exp(-delta*g) tracks
// the block-error reference (1 - exp(-g))^packet_bits in least squares.

namespace edpc {

struct ScenarioConfig {
  int cells = 4;
  int users_per_cell = 8;
  double cell_edge_m = 500.0;
  double min_distance_m = 10.0;
  int antennas = 64;
  double pathloss_exp = 3.5;
  double pathloss_ref_db = 46.0;  // reference loss at 1 m
  double noise_figure_db = 3.0;
  double bandwidth_hz = 180e3;
  double noise_psd_dbm_hz = -174.0;
  double p_c_dbm = 10.0;   // static circuit power
  double p_max_dbw = -10.0;
  double tau = 0.3;
  double impairment = 0.1;
  double rho = 1.0;        // delay weight, J/s
  double rate_bps = 1e6;
  double theta = 1.0 - 1e-3;  // success-probability target (0 disables QoS)
  double arrival = 0.0;       // packet arrival probability per slot
  int packet_bits = 100;      // block length for the success-curve fit
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument naming the field
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Scenario {
  GameSpec game;
  std::vector<Point> base_stations;  // one per cell
  std::vector<Point> users;          // K = cells * users_per_cell
  std::vector<int> serving_cell;     // per user
};

// Deterministic: the same config (seed included) reproduces the same scenario
// bit for bit.
Scenario generate_scenario(const ScenarioConfig& config);

// Unit conversions used throughout the generator and the CLI.
double dbm_to_w(double dbm);
double w_to_dbm(double w);
double dbw_to_w(double dbw);
double db_to_linear(double db);

// Least-squares slope for 1 - exp(-delta*g) against (1 - exp(-g))^packet_bits
// over the grid: coarse log-space scan, then golden-section refinement.
double fit_exponent(int packet_bits, const std::vector<double>& grid);
std::vector<double> default_fit_grid();  // 512 linear points on [0.01, 20]

}  // namespace edpc
