// Command-line front end: scenario generation, feasibility reports, the
// distributed and centralized solvers, and the batch sweep.
//
// Exit codes: 0 success, 1 infeasible, 2 solver failure, 3 bad input.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "edpc/central.hpp"
#include "edpc/experiment.hpp"
#include "edpc/feasibility.hpp"
#include "edpc/game.hpp"
#include "edpc/model.hpp"
#include "edpc/scenario.hpp"
#include "edpc/serialize.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kSolverFailure = 2;
constexpr int kBadInput = 3;

bool g_quiet = false;

void say(const std::string& line) {
  if (!g_quiet) std::cout << line << '\n';
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const char* termination_name(edpc::Termination t) {
  switch (t) {
    case edpc::Termination::converged: return "converged";
    case edpc::Termination::max_rounds: return "max_rounds";
    case edpc::Termination::infeasible: return "infeasible";
  }
  return "unknown";
}

edpc::GameSpec load_game(const std::string& path) {
  return edpc::game_from_json(edpc::load_text(path));
}

edpc::GameSpec without_qos(edpc::GameSpec spec) {
  for (edpc::LinkSpec& l : spec.links) l.theta = 0.0;
  return spec;
}

edpc::PowerVector full_power(const edpc::GameSpec& spec) {
  edpc::PowerVector p(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) p[k] = spec.links[k].p_max_w;
  return p;
}

json power_summary(const edpc::GameSpec& spec, const edpc::PowerVector& p) {
  json j;
  j["powers_w"] = p;
  j["cost_sum_jpb"] = edpc::cost_sum_or_inf(spec, p);
  j["cost_min_jpb"] = edpc::cost_min_or_inf(spec, p);
  j["energy_jpb"] = edpc::network_energy(spec, p);
  j["delay_spb"] = edpc::network_delay_or_inf(spec, p);
  return j;
}

void write_or_print(const std::string& out_path, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    edpc::save_text(out_path, text);
}

// ---- generate ----------------------------------------------------------

int cmd_generate(const std::string& config_path, const edpc::ScenarioConfig& overrides,
                 const std::vector<std::string>& given, const std::string& out,
                 const std::string& config_out) {
  edpc::ScenarioConfig cfg;
  if (!config_path.empty()) cfg = edpc::config_from_json(edpc::load_text(config_path));
  for (const std::string& name : given) {
    if (name == "--cells") cfg.cells = overrides.cells;
    if (name == "--users") cfg.users_per_cell = overrides.users_per_cell;
    if (name == "--pmax-dbw") cfg.p_max_dbw = overrides.p_max_dbw;
    if (name == "--theta") cfg.theta = overrides.theta;
    if (name == "--arrival") cfg.arrival = overrides.arrival;
    if (name == "--rho") cfg.rho = overrides.rho;
    if (name == "--seed") cfg.seed = overrides.seed;
  }
  cfg.validate();

  const edpc::Scenario scenario = edpc::generate_scenario(cfg);
  const std::string game_text = edpc::to_json(scenario.game);
  if (out.empty())
    std::cout << game_text;
  else
    edpc::save_text(out, game_text);
  if (!config_out.empty()) edpc::save_text(config_out, edpc::to_json(cfg));

  say("generated " + std::to_string(scenario.game.size()) + " links (" +
      std::to_string(cfg.cells) + " cells x " + std::to_string(cfg.users_per_cell) +
      " users, seed " + std::to_string(cfg.seed) + ")" +
      (out.empty() ? "" : " -> " + out));
  return kOk;
}

// ---- feasibility -------------------------------------------------------

int cmd_feasibility(const std::string& game_path, const std::string& out) {
  const edpc::GameSpec spec = load_game(game_path);
  const edpc::SufficiencyReport suff = edpc::check_sufficient(spec);
  const edpc::FeasibilityReport rep = edpc::check_necessary(spec);

  json j;
  j["sufficient_ok"] = rep.sufficient_ok;
  j["necessary_ok"] = rep.necessary_ok;
  j["coupling_radius"] = rep.coupling_radius;
  j["min_power_vector_w"] = rep.min_power_vector;
  j["per_link_margin_w"] = rep.per_link_margin;
  json per_link = json::array();
  for (const edpc::LinkSufficiency& l : suff.links) {
    per_link.push_back({{"saturation_ok", l.saturation_ok},
                        {"worst_case_ok", l.worst_case_ok},
                        {"worst_case_floor_w", l.worst_case_floor_w}});
  }
  j["sufficiency_per_link"] = per_link;
  write_or_print(out, j);

  say(std::string("sufficient test: ") + (rep.sufficient_ok ? "pass" : "fail"));
  say(std::string("necessary test:  ") + (rep.necessary_ok ? "pass" : "fail") +
      " (coupling radius " + fmt(rep.coupling_radius) + ")");
  return rep.necessary_ok ? kOk : kInfeasible;
}

// ---- brd ---------------------------------------------------------------

int cmd_brd(const std::string& game_path, edpc::BrdConfig cfg, bool relax,
            bool with_trace, const std::string& out) {
  edpc::GameSpec spec = load_game(game_path);
  edpc::PowerVector start;
  if (relax) {
    spec = without_qos(spec);
    cfg.qos = edpc::QosPolicy::relax_to_zero;
    start = full_power(spec);
  } else if (const auto s = edpc::find_feasible_start(spec)) {
    start = *s;
  } else {
    std::cerr << "no start satisfies every QoS floor (try --relax)\n";
    return kInfeasible;
  }

  const edpc::SolveReport rep = edpc::run_brd(spec, start, cfg);

  json j = power_summary(spec, rep.powers);
  j["termination"] = termination_name(rep.termination);
  j["rounds"] = rep.rounds;
  j["final_metric"] = rep.final_metric;
  j["per_link_cost_jpb"] = rep.per_link_cost;
  j["active_qos"] = rep.active_qos;
  j["concavity_ok"] = rep.concavity_ok;
  j["relaxed"] = rep.relaxed;
  if (with_trace) j["trace"] = rep.trace;
  write_or_print(out, j);

  say(std::string("best-response dynamics: ") + termination_name(rep.termination) +
      " after " + std::to_string(rep.rounds) + " rounds (metric " +
      fmt(rep.final_metric) + ")");
  if (rep.termination == edpc::Termination::converged) {
    say("network cost " + fmt(edpc::cost_sum_or_inf(spec, rep.powers)) + " J/bit, " +
        std::to_string(rep.active_qos.size()) + " links on their QoS floor");
    return kOk;
  }
  return rep.termination == edpc::Termination::infeasible ? kInfeasible : kSolverFailure;
}

// ---- mbi ---------------------------------------------------------------

int cmd_mbi(const std::string& game_path, bool bottleneck, const edpc::MbiConfig& cfg,
            bool warm_start_brd, const std::string& out) {
  const edpc::GameSpec spec = load_game(game_path);
  edpc::PowerVector start = full_power(spec);
  if (warm_start_brd) {
    const edpc::GameSpec relaxed = without_qos(spec);
    edpc::BrdConfig brd_cfg;
    brd_cfg.qos = edpc::QosPolicy::relax_to_zero;
    const edpc::SolveReport ne = edpc::run_brd(relaxed, start, brd_cfg);
    if (ne.termination == edpc::Termination::converged) {
      start = ne.powers;
      say("warm start from the distributed equilibrium (cost " +
          fmt(edpc::cost_sum_or_inf(spec, ne.powers)) + " J/bit)");
    } else {
      say("warm start unavailable, falling back to full power");
    }
  }

  edpc::CentralReport rep;
  try {
    rep = bottleneck ? edpc::run_mbi_min(spec, start, cfg)
                     : edpc::run_mbi_sum(spec, start, cfg);
  } catch (const edpc::QueueUnstable& e) {
    std::cerr << e.what() << '\n';
    return kInfeasible;
  } catch (const edpc::AllCandidatesInfeasible& e) {
    std::cerr << e.what() << '\n';
    return kInfeasible;
  }

  json j = power_summary(spec, rep.powers);
  j["objective_trace"] = rep.objective_trace;
  j["chosen_block"] = rep.chosen_block;
  j["kkt_residual"] = rep.kkt_residual;
  j["iters"] = rep.iters;
  j["converged"] = rep.converged;
  if (bottleneck) {
    j["final_t"] = rep.final_t;
    j["t_trace"] = rep.t_trace;
  }
  write_or_print(out, j);

  const double last = rep.objective_trace.back();
  say(std::string(bottleneck ? "bottleneck" : "average") + "-cost block improvement: " +
      (rep.converged ? "converged" : "iteration cap") + " after " +
      std::to_string(rep.iters) + " iterations, objective " + fmt(last) +
      ", projected gradient " + fmt(rep.kkt_residual));
  return rep.converged ? kOk : kSolverFailure;
}

// ---- dinkelbach-demo ---------------------------------------------------

int cmd_dinkelbach(const std::string& game_path, std::size_t link_index, double tol,
                   const std::string& out) {
  edpc::GameSpec spec;
  if (game_path.empty()) {
    edpc::ScenarioConfig cfg;
    cfg.cells = 2;
    cfg.users_per_cell = 4;
    spec = edpc::generate_scenario(cfg).game;
    say("no game given, using a generated 8-link instance (seed 1)");
  } else {
    spec = load_game(game_path);
  }
  if (link_index >= spec.size()) {
    std::cerr << "link index " << link_index << " out of range (network has "
              << spec.size() << " links)\n";
    return kBadInput;
  }

  // Energy per bit of one link, everyone else at full power: the numerator is
  // the spent power and the denominator the goodput, so the ratio solver and a
  // plain grid argmin must land on the same operating point.
  const edpc::LinkSpec& link = spec.links[link_index];
  const double omega =
      edpc::interference_plus_noise(spec, full_power(spec), link_index);
  const auto spent = [&](double p) { return p + link.p_c_w; };
  const auto goodput = [&](double p) {
    return link.success.rate_bps *
           link.success.value(edpc::sinr_from_interference(link, p, omega));
  };

  std::vector<double> grid;
  for (int i = 1; i <= 4096; ++i)
    grid.push_back(link.p_max_w * static_cast<double>(i) / 4096.0);
  const auto inner = [&](double lambda) {
    double best_x = grid.front();
    double best_v = std::numeric_limits<double>::infinity();
    for (double p : grid) {
      const double v = spent(p) - lambda * goodput(p);
      if (v < best_v) {
        best_v = v;
        best_x = p;
      }
    }
    return best_x;
  };

  const edpc::DinkelbachReport rep = edpc::dinkelbach(spent, goodput, inner, tol);

  double grid_best = grid.front();
  for (double p : grid)
    if (spent(p) / goodput(p) < spent(grid_best) / goodput(grid_best)) grid_best = p;

  json j;
  j["link"] = link_index;
  j["power_w"] = rep.x;
  j["energy_jpb"] = rep.ratio;
  j["iters"] = rep.iters;
  j["lambda_trace"] = rep.lambda_trace;
  j["gap_trace"] = rep.gap_trace;
  j["converged"] = rep.converged;
  j["grid_argmin_w"] = grid_best;
  write_or_print(out, j);

  say("ratio solver: " + fmt(rep.ratio) + " J/bit at " + fmt(rep.x) + " W in " +
      std::to_string(rep.iters) + " iterations (grid argmin " + fmt(grid_best) + " W)");
  return rep.converged ? kOk : kSolverFailure;
}

// ---- sweep -------------------------------------------------------------

int cmd_sweep(edpc::ExperimentPlan plan, bool full, const std::vector<std::string>& schemes,
              const std::string& out, const std::string& plot_out) {
  if (!full) {
    plan.scenario.cells = 2;
    plan.scenario.users_per_cell = 4;
  }
  if (!schemes.empty()) {
    plan.schemes.clear();
    for (const std::string& name : schemes) {
      if (name == "brd-qos")
        plan.schemes.push_back(edpc::Scheme::brd_qos);
      else if (name == "brd-relaxed")
        plan.schemes.push_back(edpc::Scheme::brd_relaxed);
      else if (name == "brd-perturbed")
        plan.schemes.push_back(edpc::Scheme::brd_perturbed);
      else if (name == "mbi-sum")
        plan.schemes.push_back(edpc::Scheme::mbi_sum);
      else if (name == "mbi-min")
        plan.schemes.push_back(edpc::Scheme::mbi_min);
      else {
        std::cerr << "unknown scheme '" << name
                  << "' (expected brd-qos, brd-relaxed, brd-perturbed, mbi-sum, mbi-min)\n";
        return kBadInput;
      }
    }
  }

  say("sweep: " + std::to_string(plan.schemes.size()) + " schemes, " +
      std::to_string(plan.pmax_dbw.size()) + " budgets, " + std::to_string(plan.runs) +
      " runs each (" + std::to_string(plan.scenario.cells) + " cells x " +
      std::to_string(plan.scenario.users_per_cell) + " users)");

  const edpc::ExperimentResult result = edpc::run_experiment(plan);
  edpc::save_text(out, edpc::to_csv(result));
  if (!plot_out.empty()) edpc::save_text(plot_out, edpc::plot_script(out));

  int converged = 0, infeasible = 0, other = 0;
  for (const edpc::RunRecord& r : result.rows) {
    if (r.status == "converged")
      ++converged;
    else if (r.status == "infeasible")
      ++infeasible;
    else
      ++other;
  }
  say(std::to_string(result.rows.size()) + " rows -> " + out + " (" +
      std::to_string(converged) + " converged, " + std::to_string(infeasible) +
      " infeasible, " + std::to_string(other) + " other)");
  if (!plot_out.empty()) say("plot script -> " + plot_out);
  return kOk;
}

// ---- selftest ----------------------------------------------------------

int cmd_selftest() {
  int failures = 0;
  const auto check = [&](bool ok, const std::string& name) {
    std::cout << (ok ? "ok:   " : "FAIL: ") << name << '\n';
    if (!ok) ++failures;
  };

  edpc::SuccessModel s;
  s.delta = 2.0;
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(std::pow(10.0, -3.0 + 8.0 * i / 400.0));
  check(edpc::check_success_properties([&](double g) { return s.value(g); }, grid).all(),
        "success curve shape (origin, ratio, monotone, concave)");
  check(edpc::concavity_margin(s, grid) <= 1e-12, "uniqueness margin non-positive");

  edpc::ScenarioConfig cfg;
  cfg.cells = 2;
  cfg.users_per_cell = 4;
  edpc::Scenario scenario = edpc::generate_scenario(cfg);
  check(scenario.game.size() == 8, "generator yields the requested link count");

  const edpc::GameSpec relaxed = without_qos(scenario.game);
  edpc::BrdConfig brd_cfg;
  brd_cfg.qos = edpc::QosPolicy::relax_to_zero;
  const edpc::SolveReport ne = edpc::run_brd(relaxed, full_power(relaxed), brd_cfg);
  check(ne.termination == edpc::Termination::converged, "relaxed dynamics converge");
  check(edpc::verify_equilibrium(relaxed, ne.powers, 1e-6).is_equilibrium,
        "no profitable unilateral deviation at the limit");

  edpc::MbiConfig mbi_cfg;
  const edpc::CentralReport central = edpc::run_mbi_sum(relaxed, full_power(relaxed), mbi_cfg);
  bool monotone = true;
  for (std::size_t i = 1; i < central.objective_trace.size(); ++i)
    monotone = monotone && central.objective_trace[i] <= central.objective_trace[i - 1];
  check(monotone, "block improvement trace never increases");
  check(edpc::cost_sum_or_inf(relaxed, central.powers) <=
            edpc::cost_sum_or_inf(relaxed, ne.powers) + 1e-12,
        "centralized cost at most the equilibrium cost");

  const std::string round_trip = edpc::to_json(scenario.game);
  check(edpc::to_json(edpc::game_from_json(round_trip)) == round_trip,
        "game JSON round-trips exactly");

  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? kOk : kSolverFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-delay power control: generators, solvers, sweeps"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", g_quiet, "suppress progress chatter");

  // generate
  auto* gen = app.add_subcommand("generate", "draw a random network and write its spec");
  std::string gen_config, gen_out, gen_config_out;
  edpc::ScenarioConfig gen_overrides;
  gen->add_option("--config", gen_config, "scenario config JSON to start from");
  gen->add_option("--cells", gen_overrides.cells, "number of cells");
  gen->add_option("--users", gen_overrides.users_per_cell, "users per cell");
  gen->add_option("--pmax-dbw", gen_overrides.p_max_dbw, "transmit power budget");
  gen->add_option("--theta", gen_overrides.theta, "success-probability target");
  gen->add_option("--arrival", gen_overrides.arrival, "packet arrival probability");
  gen->add_option("--rho", gen_overrides.rho, "delay weight (J/s)");
  gen->add_option("--seed", gen_overrides.seed, "channel seed");
  gen->add_option("-o,--out", gen_out, "game JSON path (stdout when omitted)");
  gen->add_option("--config-out", gen_config_out, "also write the effective config");

  // feasibility
  auto* feas = app.add_subcommand("feasibility", "QoS feasibility tests for a game");
  std::string feas_game, feas_out;
  feas->add_option("--game", feas_game, "game JSON path")->required();
  feas->add_option("-o,--out", feas_out, "report JSON path (stdout when omitted)");

  // brd
  auto* brd = app.add_subcommand("brd", "distributed best-response dynamics");
  std::string brd_game, brd_out, brd_schedule = "synchronous";
  edpc::BrdConfig brd_cfg;
  bool brd_relax = false, brd_trace = false;
  brd->add_option("--game", brd_game, "game JSON path")->required();
  brd->add_option("--epsilon", brd_cfg.epsilon, "relative step-size stop");
  brd->add_option("--max-rounds", brd_cfg.max_rounds, "round cap");
  brd->add_option("--schedule", brd_schedule, "synchronous | sequential | randomized");
  brd->add_option("--seed", brd_cfg.seed, "randomized-schedule seed");
  brd->add_flag("--relax", brd_relax, "drop the QoS targets before solving");
  brd->add_flag("--trace", brd_trace, "include the power trace in the report");
  brd->add_option("-o,--out", brd_out, "report JSON path (stdout when omitted)");

  // mbi-sum / mbi-min
  std::string mbi_game, mbi_out;
  edpc::MbiConfig mbi_cfg;
  bool mbi_warm = false;
  const auto add_mbi_options = [&](CLI::App* cmd) {
    cmd->add_option("--game", mbi_game, "game JSON path")->required();
    cmd->add_option("--epsilon", mbi_cfg.epsilon, "minimum committed decrease");
    cmd->add_option("--max-iters", mbi_cfg.max_iters, "iteration cap");
    cmd->add_option("--grid-points", mbi_cfg.grid_points, "stationary-scan density");
    cmd->add_flag("--warm-start-brd", mbi_warm, "start from the relaxed equilibrium");
    cmd->add_option("-o,--out", mbi_out, "report JSON path (stdout when omitted)");
  };
  auto* mbi_sum = app.add_subcommand("mbi-sum", "centralized average-cost minimization");
  add_mbi_options(mbi_sum);
  auto* mbi_min = app.add_subcommand("mbi-min", "centralized bottleneck-cost minimization");
  add_mbi_options(mbi_min);

  // dinkelbach-demo
  auto* dink = app.add_subcommand("dinkelbach-demo",
                                  "single-link energy-per-bit via ratio iteration");
  std::string dink_game, dink_out;
  std::size_t dink_link = 0;
  double dink_tol = 1e-10;
  dink->add_option("--game", dink_game, "game JSON path (generated when omitted)");
  dink->add_option("--link", dink_link, "link index");
  dink->add_option("--tolerance", dink_tol, "auxiliary-value stop");
  dink->add_option("-o,--out", dink_out, "report JSON path (stdout when omitted)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "batch experiment over budgets and schemes");
  edpc::ExperimentPlan plan;
  bool sweep_full = false;
  std::vector<std::string> sweep_schemes;
  std::string sweep_out = "results.csv", sweep_plot;
  sweep->add_option("--runs", plan.runs, "Monte Carlo draws per cell");
  sweep->add_option("--seed", plan.seed, "base channel seed");
  sweep->add_option("--pmax-dbw", plan.pmax_dbw, "budget grid (dBW)");
  sweep->add_option("--schemes", sweep_schemes, "subset of schemes to run");
  sweep->add_flag("--full", sweep_full, "full 4x8 network (default is a 2x4 desk run)");
  sweep->add_option("-o,--out", sweep_out, "result CSV path");
  sweep->add_option("--plot", sweep_plot, "also write a matplotlib script");

  // selftest
  app.add_subcommand("selftest", "quick invariant battery on a generated network");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      std::vector<std::string> given;
      for (const char* name : {"--cells", "--users", "--pmax-dbw", "--theta", "--arrival",
                               "--rho", "--seed"})
        if (gen->count(name)) given.emplace_back(name);
      return cmd_generate(gen_config, gen_overrides, given, gen_out, gen_config_out);
    }
    if (feas->parsed()) return cmd_feasibility(feas_game, feas_out);
    if (brd->parsed()) {
      if (brd_schedule == "synchronous")
        brd_cfg.schedule = edpc::Schedule::synchronous;
      else if (brd_schedule == "sequential")
        brd_cfg.schedule = edpc::Schedule::sequential;
      else if (brd_schedule == "randomized")
        brd_cfg.schedule = edpc::Schedule::randomized;
      else {
        std::cerr << "unknown schedule '" << brd_schedule << "'\n";
        return kBadInput;
      }
      return cmd_brd(brd_game, brd_cfg, brd_relax, brd_trace, brd_out);
    }
    if (mbi_sum->parsed()) return cmd_mbi(mbi_game, false, mbi_cfg, mbi_warm, mbi_out);
    if (mbi_min->parsed()) return cmd_mbi(mbi_game, true, mbi_cfg, mbi_warm, mbi_out);
    if (dink->parsed()) return cmd_dinkelbach(dink_game, dink_link, dink_tol, dink_out);
    if (sweep->parsed()) return cmd_sweep(plan, sweep_full, sweep_schemes, sweep_out, sweep_plot);
    return cmd_selftest();
  } catch (const edpc::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kSolverFailure;
  }
}
