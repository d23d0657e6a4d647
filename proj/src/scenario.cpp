#include "edpc/scenario.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace edpc {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument("scenario." + field + ": " + why);
}

// Distribution shapes are hand-rolled on top of the (bit-exact) engine so the
// draws are identical across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential1(std::mt19937_64& rng) { return -std::log1p(-uniform01(rng)); }

}  // namespace

void ScenarioConfig::validate() const {
  if (cells < 1) fail("cells", "need at least one cell");
  if (users_per_cell < 1) fail("users_per_cell", "need at least one user per cell");
  if (!(cell_edge_m > 0.0)) fail("cell_edge_m", "must be positive");
  if (!(min_distance_m > 0.0) || !(min_distance_m < cell_edge_m / 2.0))
    fail("min_distance_m", "must be positive and below half the cell edge");
  if (antennas < 1) fail("antennas", "need at least one antenna");
  if (!(pathloss_exp > 0.0)) fail("pathloss_exp", "must be positive");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth_hz", "must be positive");
  if (!(tau >= 0.0 && tau < 1.0)) fail("tau", "must lie in [0, 1)");
  if (!(impairment >= 0.0 && impairment < 1.0)) fail("impairment", "must lie in [0, 1)");
  if (!(rho > 0.0)) fail("rho", "must be positive");
  if (!(rate_bps > 0.0)) fail("rate_bps", "must be positive");
  if (!(theta >= 0.0 && theta < 1.0)) fail("theta", "must lie in [0, 1)");
  if (!(arrival >= 0.0 && arrival < 1.0)) fail("arrival", "must lie in [0, 1)");
  if (theta > 0.0 && !(theta > arrival)) fail("theta", "must exceed arrival");
  if (packet_bits < 1) fail("packet_bits", "must be at least 1");
}

double dbm_to_w(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double w_to_dbm(double w) { return 10.0 * std::log10(w * 1e3); }
double dbw_to_w(double dbw) { return std::pow(10.0, dbw / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::vector<double> default_fit_grid() {
  std::vector<double> grid(512);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = 0.01 + (20.0 - 0.01) * static_cast<double>(i) / (grid.size() - 1);
  return grid;
}

namespace {

double fit_mse(double delta, int q, const std::vector<double>& grid) {
  double acc = 0.0;
  for (double g : grid) {
    const double model = -std::expm1(-delta * g);
    const double reference = std::pow(-std::expm1(-g), q);
    const double d = model - reference;
    acc += d * d;
  }
  return acc;
}

}  // namespace

double fit_exponent(int packet_bits, const std::vector<double>& grid) {
  if (packet_bits < 1) throw std::invalid_argument("fit_exponent: packet_bits must be >= 1");
  if (grid.size() < 2) throw std::invalid_argument("fit_exponent: grid too small");

  // Coarse scan over log delta, then golden-section inside the best bracket.
  constexpr int kCoarse = 64;
  const double lo_log = std::log(1e-3), hi_log = std::log(1e3);
  int best = 0;
  double best_mse = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kCoarse; ++i) {
    const double d = std::exp(lo_log + (hi_log - lo_log) * i / (kCoarse - 1));
    const double mse = fit_mse(d, packet_bits, grid);
    if (mse < best_mse) {
      best_mse = mse;
      best = i;
    }
  }
  const double step = (hi_log - lo_log) / (kCoarse - 1);
  double a = lo_log + step * std::max(0, best - 1);
  double b = lo_log + step * std::min(kCoarse - 1, best + 1);

  constexpr double kGolden = 0.6180339887498949;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = fit_mse(std::exp(x1), packet_bits, grid);
  double f2 = fit_mse(std::exp(x2), packet_bits, grid);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = fit_mse(std::exp(x1), packet_bits, grid);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = fit_mse(std::exp(x2), packet_bits, grid);
    }
  }
  return std::exp(0.5 * (a + b));
}

Scenario generate_scenario(const ScenarioConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);

  Scenario sc;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(config.cells))));
  const double edge = config.cell_edge_m;
  for (int c = 0; c < config.cells; ++c) {
    const int col = c % cols;
    const int row = c / cols;
    sc.base_stations.push_back({(col + 0.5) * edge, (row + 0.5) * edge});
  }

  for (int c = 0; c < config.cells; ++c) {
    const Point bs = sc.base_stations[static_cast<std::size_t>(c)];
    const double x0 = bs.x - edge / 2.0, y0 = bs.y - edge / 2.0;
    for (int u = 0; u < config.users_per_cell; ++u) {
      Point pos;
      bool placed = false;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        pos = {x0 + edge * uniform01(rng), y0 + edge * uniform01(rng)};
        const double d = std::hypot(pos.x - bs.x, pos.y - bs.y);
        if (d >= config.min_distance_m) {
          placed = true;
          break;
        }
      }
      if (!placed) throw std::runtime_error("generate_scenario: user placement failed");
      sc.users.push_back(pos);
      sc.serving_cell.push_back(c);
    }
  }

  const std::size_t k_links = sc.users.size();
  const double ref_gain = db_to_linear(-config.pathloss_ref_db);

  // One channel gain per (base station, transmitter) pair; users at the same
  // base station see the same interferer through the same channel.
  std::vector<std::vector<double>> gain(static_cast<std::size_t>(config.cells),
                                        std::vector<double>(k_links));
  for (int b = 0; b < config.cells; ++b) {
    const Point bs = sc.base_stations[static_cast<std::size_t>(b)];
    for (std::size_t j = 0; j < k_links; ++j) {
      const double d = std::max(config.min_distance_m,
                                std::hypot(sc.users[j].x - bs.x, sc.users[j].y - bs.y));
      gain[static_cast<std::size_t>(b)][j] =
          ref_gain * std::pow(d, -config.pathloss_exp) * exponential1(rng);
    }
  }

  const double delta = fit_exponent(config.packet_bits, default_fit_grid());
  const double sigma2 = db_to_linear(config.noise_figure_db) * config.bandwidth_hz *
                        dbm_to_w(config.noise_psd_dbm_hz);
  const double tau2 = config.tau * config.tau;
  const double eps2 = config.impairment * config.impairment;
  const double n_antennas = static_cast<double>(config.antennas);
  const double cross_scale = 1.0 / n_antennas + tau2 + eps2;

  sc.game.links.resize(k_links);
  for (std::size_t k = 0; k < k_links; ++k) {
    const auto& row = gain[static_cast<std::size_t>(sc.serving_cell[k])];
    LinkSpec& link = sc.game.links[k];
    link.coeffs.alpha = n_antennas * row[k] * (1.0 - tau2) * (1.0 - eps2);
    link.coeffs.phi = row[k] * (tau2 + eps2);
    link.coeffs.sigma2_w = sigma2;
    link.coeffs.beta.assign(k_links, 0.0);
    for (std::size_t j = 0; j < k_links; ++j)
      if (j != k) link.coeffs.beta[j] = row[j] * cross_scale;
    link.success.delta = delta;
    link.success.arrival = config.arrival;
    link.success.rate_bps = config.rate_bps;
    link.p_max_w = dbw_to_w(config.p_max_dbw);
    link.p_c_w = dbm_to_w(config.p_c_dbm);
    link.theta = config.theta;
    link.rho = config.rho;
  }
  sc.game.validate();
  return sc;
}

}  // namespace edpc
