#include "edpc/serialize.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace edpc {

namespace {

using nlohmann::json;

double number_at(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw ParseError(path + "." + key + ": missing");
  if (!j[key].is_number()) throw ParseError(path + "." + key + ": expected a number");
  return j[key].get<double>();
}

std::int64_t integer_at(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw ParseError(path + "." + key + ": missing");
  if (!j[key].is_number_integer()) throw ParseError(path + "." + key + ": expected an integer");
  return j[key].get<std::int64_t>();
}

}  // namespace

std::string to_json(const GameSpec& spec) {
  json links = json::array();
  for (const LinkSpec& l : spec.links) {
    links.push_back({{"alpha", l.coeffs.alpha},
                     {"phi", l.coeffs.phi},
                     {"beta", l.coeffs.beta},
                     {"sigma2_w", l.coeffs.sigma2_w},
                     {"delta", l.success.delta},
                     {"arrival", l.success.arrival},
                     {"rate_bps", l.success.rate_bps},
                     {"p_max_w", l.p_max_w},
                     {"p_c_w", l.p_c_w},
                     {"theta", l.theta},
                     {"rho_js", l.rho}});
  }
  return json{{"links", links}}.dump(2) + "\n";
}

GameSpec game_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("game spec: ") + e.what());
  }
  if (!j.contains("links") || !j["links"].is_array())
    throw ParseError("game spec: 'links' array missing");

  GameSpec spec;
  std::size_t idx = 0;
  for (const json& node : j["links"]) {
    const std::string path = "links[" + std::to_string(idx++) + "]";
    LinkSpec l;
    l.coeffs.alpha = number_at(node, path, "alpha");
    l.coeffs.phi = number_at(node, path, "phi");
    l.coeffs.sigma2_w = number_at(node, path, "sigma2_w");
    if (!node.contains("beta") || !node["beta"].is_array())
      throw ParseError(path + ".beta: expected an array");
    for (const json& b : node["beta"]) {
      if (!b.is_number()) throw ParseError(path + ".beta: expected numbers");
      l.coeffs.beta.push_back(b.get<double>());
    }
    l.success.delta = number_at(node, path, "delta");
    l.success.arrival = number_at(node, path, "arrival");
    l.success.rate_bps = number_at(node, path, "rate_bps");
    l.p_max_w = number_at(node, path, "p_max_w");
    l.p_c_w = number_at(node, path, "p_c_w");
    l.theta = number_at(node, path, "theta");
    l.rho = number_at(node, path, "rho_js");
    spec.links.push_back(std::move(l));
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("game spec: ") + e.what());
  }
  return spec;
}

std::string to_json(const ScenarioConfig& c) {
  return json{{"cells", c.cells},
              {"users_per_cell", c.users_per_cell},
              {"cell_edge_m", c.cell_edge_m},
              {"min_distance_m", c.min_distance_m},
              {"antennas", c.antennas},
              {"pathloss_exp", c.pathloss_exp},
              {"pathloss_ref_db", c.pathloss_ref_db},
              {"noise_figure_db", c.noise_figure_db},
              {"bandwidth_hz", c.bandwidth_hz},
              {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
              {"p_c_dbm", c.p_c_dbm},
              {"p_max_dbw", c.p_max_dbw},
              {"tau", c.tau},
              {"impairment", c.impairment},
              {"rho_js", c.rho},
              {"rate_bps", c.rate_bps},
              {"theta", c.theta},
              {"arrival", c.arrival},
              {"packet_bits", c.packet_bits},
              {"seed", c.seed}}
             .dump(2) +
         "\n";
}

ScenarioConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario config: ") + e.what());
  }
  ScenarioConfig c;
  const std::string path = "scenario";
  c.cells = static_cast<int>(integer_at(j, path, "cells"));
  c.users_per_cell = static_cast<int>(integer_at(j, path, "users_per_cell"));
  c.cell_edge_m = number_at(j, path, "cell_edge_m");
  c.min_distance_m = number_at(j, path, "min_distance_m");
  c.antennas = static_cast<int>(integer_at(j, path, "antennas"));
  c.pathloss_exp = number_at(j, path, "pathloss_exp");
  c.pathloss_ref_db = number_at(j, path, "pathloss_ref_db");
  c.noise_figure_db = number_at(j, path, "noise_figure_db");
  c.bandwidth_hz = number_at(j, path, "bandwidth_hz");
  c.noise_psd_dbm_hz = number_at(j, path, "noise_psd_dbm_hz");
  c.p_c_dbm = number_at(j, path, "p_c_dbm");
  c.p_max_dbw = number_at(j, path, "p_max_dbw");
  c.tau = number_at(j, path, "tau");
  c.impairment = number_at(j, path, "impairment");
  c.rho = number_at(j, path, "rho_js");
  c.rate_bps = number_at(j, path, "rate_bps");
  c.theta = number_at(j, path, "theta");
  c.arrival = number_at(j, path, "arrival");
  c.packet_bits = static_cast<int>(integer_at(j, path, "packet_bits"));
  c.seed = static_cast<std::uint64_t>(integer_at(j, path, "seed"));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return c;
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace edpc
