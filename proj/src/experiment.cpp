#include "edpc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "edpc/central.hpp"
#include "edpc/feasibility.hpp"
#include "edpc/game.hpp"

namespace edpc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

GameSpec relax_qos(GameSpec spec) {
  for (LinkSpec& l : spec.links) l.theta = 0.0;
  return spec;
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_rounds: return "max_rounds";
    case Termination::infeasible: return "infeasible";
  }
  return "error";
}

void fill_metrics(RunRecord& row, const GameSpec& spec, const PowerVector& p) {
  row.powers_w = p;
  row.cost_sum_jpb = cost_sum_or_inf(spec, p);
  row.cost_min_jpb = cost_min_or_inf(spec, p);
  row.energy_jpb = network_energy(spec, p);
  row.delay_spb = network_delay_or_inf(spec, p);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, total = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double c = link_cost_or_inf(spec.links[k], p[k], sinr(spec, p, k));
    lo = std::min(lo, c);
    hi = std::max(hi, c);
    total += p[k];
  }
  row.min_link_cost_jpb = lo;
  row.max_link_cost_jpb = hi;
  row.mean_power_w = total / static_cast<double>(spec.size());
}

void mark_failed(RunRecord& row, const std::string& status) {
  row.status = status;
  row.iterations = 0;
  row.cost_sum_jpb = kNan;
  row.cost_min_jpb = kNan;
  row.energy_jpb = kNan;
  row.delay_spb = kNan;
  row.min_link_cost_jpb = kNan;
  row.max_link_cost_jpb = kNan;
  row.mean_power_w = kNan;
  row.powers_w.clear();
}

PowerVector full_power(const GameSpec& spec) {
  PowerVector p(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) p[k] = spec.links[k].p_max_w;
  return p;
}

// QoS-enforced distributed run with the standard fallback: no feasible start,
// or an infeasible best response mid-run, relaxes the whole run to theta = 0.
void run_distributed(RunRecord& row, const GameSpec& spec, const GameSpec& perceived,
                     const std::vector<double>& gamma_scale) {
  BrdConfig cfg;
  cfg.schedule = Schedule::synchronous;

  const bool qos_live =
      std::any_of(spec.links.begin(), spec.links.end(),
                  [](const LinkSpec& l) { return l.theta > 0.0; });
  if (qos_live) {
    if (const auto start = find_feasible_start(spec)) {
      const SolveReport report = run_brd_perceived(spec, perceived, gamma_scale, *start, cfg);
      if (report.termination != Termination::infeasible) {
        row.status = termination_name(report.termination);
        row.iterations = report.rounds;
        fill_metrics(row, spec, report.powers);
        return;
      }
    }
    row.relaxed = true;
  }

  const GameSpec relaxed_spec = relax_qos(spec);
  const GameSpec relaxed_view = relax_qos(perceived);
  cfg.qos = QosPolicy::relax_to_zero;
  const SolveReport report =
      run_brd_perceived(relaxed_spec, relaxed_view, gamma_scale, full_power(relaxed_spec), cfg);
  row.status = termination_name(report.termination);
  row.iterations = report.rounds;
  if (report.termination == Termination::infeasible) {
    mark_failed(row, "infeasible");
    row.relaxed = true;
  } else {
    fill_metrics(row, relaxed_spec, report.powers);
  }
}

void run_centralized(RunRecord& row, const GameSpec& spec, bool bottleneck) {
  MbiConfig cfg;
  cfg.epsilon = 1e-12;  // the default 1e-6 sits at the cost scale of these units
  try {
    const CentralReport report =
        bottleneck ? run_mbi_min(spec, full_power(spec), cfg)
                   : run_mbi_sum(spec, full_power(spec), cfg);
    row.status = report.converged ? "converged" : "max_rounds";
    row.iterations = report.iters;
    fill_metrics(row, spec, report.powers);
  } catch (const QueueUnstable&) {
    mark_failed(row, "unstable");
  } catch (const AllCandidatesInfeasible&) {
    mark_failed(row, "infeasible");
  }
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::brd_qos: return "brd-qos";
    case Scheme::brd_relaxed: return "brd-relaxed";
    case Scheme::brd_perturbed: return "brd-perturbed";
    case Scheme::mbi_sum: return "mbi-sum";
    case Scheme::mbi_min: return "mbi-min";
  }
  return "unknown";
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  ExperimentResult result;
  for (Scheme scheme : plan.schemes) {
    const bool uses_theta = scheme == Scheme::brd_qos || scheme == Scheme::brd_perturbed;
    const std::vector<double> thetas =
        uses_theta ? plan.theta_levels : std::vector<double>{0.0};
    for (double theta : thetas) {
      for (double rho : plan.rho_levels) {
        for (double pmax : plan.pmax_dbw) {
          for (int run = 0; run < plan.runs; ++run) {
            RunRecord row;
            row.scheme = scheme_name(scheme);
            row.theta = theta;
            row.rho_js = rho;
            row.pmax_dbw = pmax;
            row.run = run;

            ScenarioConfig config = plan.scenario;
            config.seed = plan.seed + static_cast<std::uint64_t>(run);
            config.p_max_dbw = pmax;
            config.theta = theta;
            config.rho = rho;

            try {
              const GameSpec game = generate_scenario(config).game;
              switch (scheme) {
                case Scheme::brd_qos:
                case Scheme::brd_relaxed:
                  run_distributed(row, game, game, {});
                  break;
                case Scheme::brd_perturbed: {
                  // Fresh error draws per run, decoupled from the channel seed.
                  std::mt19937_64 rng(plan.seed * 1000003ull +
                                      static_cast<std::uint64_t>(run) * 7919ull);
                  GameSpec perceived = game;
                  std::vector<double> gamma_scale(game.size());
                  for (std::size_t k = 0; k < game.size(); ++k) {
                    auto factor = [&]() {
                      const double sign = (rng() & 1u) ? 1.0 : -1.0;
                      return 1.0 + sign * uniform01(rng) * plan.perturbation;
                    };
                    perceived.links[k].coeffs.alpha *= factor();
                    perceived.links[k].coeffs.phi *= factor();
                    gamma_scale[k] = factor();
                  }
                  run_distributed(row, game, perceived, gamma_scale);
                  break;
                }
                case Scheme::mbi_sum:
                  run_centralized(row, game, false);
                  break;
                case Scheme::mbi_min:
                  run_centralized(row, game, true);
                  break;
              }
            } catch (const std::exception&) {
              mark_failed(row, "error");
            }
            result.rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return result;
}

namespace {

const char* kCsvHeader =
    "scheme,theta,rho_js,pmax_dbw,run,status,relaxed,iterations,cost_sum_jpb,cost_min_jpb,"
    "energy_jpb,delay_spb,min_link_cost_jpb,max_link_cost_jpb,mean_power_w,powers_w";

}  // namespace

std::string to_csv(const ExperimentResult& result) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const RunRecord& r : result.rows) {
    out += r.scheme;
    out += ',' + format_double(r.theta);
    out += ',' + format_double(r.rho_js);
    out += ',' + format_double(r.pmax_dbw);
    out += ',' + std::to_string(r.run);
    out += ',' + r.status;
    out += r.relaxed ? ",1" : ",0";
    out += ',' + std::to_string(r.iterations);
    out += ',' + format_double(r.cost_sum_jpb);
    out += ',' + format_double(r.cost_min_jpb);
    out += ',' + format_double(r.energy_jpb);
    out += ',' + format_double(r.delay_spb);
    out += ',' + format_double(r.min_link_cost_jpb);
    out += ',' + format_double(r.max_link_cost_jpb);
    out += ',' + format_double(r.mean_power_w);
    out += ',';
    for (std::size_t i = 0; i < r.powers_w.size(); ++i) {
      if (i) out += ';';
      out += format_double(r.powers_w[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

ExperimentResult from_csv(const std::string& text) {
  ExperimentResult result;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("result csv: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 16) throw std::runtime_error("result csv: wrong field count");
    RunRecord r;
    r.scheme = f[0];
    r.theta = std::strtod(f[1].c_str(), nullptr);
    r.rho_js = std::strtod(f[2].c_str(), nullptr);
    r.pmax_dbw = std::strtod(f[3].c_str(), nullptr);
    r.run = std::stoi(f[4]);
    r.status = f[5];
    r.relaxed = f[6] == "1";
    r.iterations = std::stoi(f[7]);
    r.cost_sum_jpb = std::strtod(f[8].c_str(), nullptr);
    r.cost_min_jpb = std::strtod(f[9].c_str(), nullptr);
    r.energy_jpb = std::strtod(f[10].c_str(), nullptr);
    r.delay_spb = std::strtod(f[11].c_str(), nullptr);
    r.min_link_cost_jpb = std::strtod(f[12].c_str(), nullptr);
    r.max_link_cost_jpb = std::strtod(f[13].c_str(), nullptr);
    r.mean_power_w = std::strtod(f[14].c_str(), nullptr);
    if (!f[15].empty())
      for (const std::string& v : split(f[15], ';'))
        r.powers_w.push_back(std::strtod(v.c_str(), nullptr));
    result.rows.push_back(std::move(r));
  }
  return result;
}

std::string plot_script(const std::string& csv_path) {
  std::string s;
  s += "#!/usr/bin/env python3\n";
  s += "# Regenerates the sweep summary charts from the result CSV.\n";
  s += "import csv, math\n";
  s += "from collections import defaultdict\n";
  s += "import matplotlib\n";
  s += "matplotlib.use('Agg')\n";
  s += "import matplotlib.pyplot as plt\n\n";
  s += "CSV = '" + csv_path + "'\n";
  s += R"(
rows = []
with open(CSV) as fh:
    for row in csv.DictReader(fh):
        rows.append(row)

def mean_by(metric, want_scheme):
    acc = defaultdict(list)
    for r in rows:
        if r['scheme'] != want_scheme:
            continue
        v = float(r[metric]) if r[metric] else float('nan')
        if math.isfinite(v):
            acc[float(r['pmax_dbw'])].append(v)
    xs = sorted(acc)
    return xs, [sum(acc[x]) / len(acc[x]) for x in xs]

schemes = sorted({r['scheme'] for r in rows})

def line_chart(metric, ylabel, fname, logy=True):
    plt.figure(figsize=(6, 4))
    for s in schemes:
        xs, ys = mean_by(metric, s)
        if xs:
            plt.plot(xs, ys, marker='o', label=s)
    if logy:
        plt.yscale('log')
    plt.xlabel('transmit power budget (dBW)')
    plt.ylabel(ylabel)
    plt.grid(True, which='both', alpha=0.3)
    plt.legend()
    plt.tight_layout()
    plt.savefig(fname, dpi=150)
    plt.close()

line_chart('cost_sum_jpb', 'average network cost (J/bit)', 'sweep_cost_sum.png')
line_chart('cost_min_jpb', 'bottleneck network cost (J/bit)', 'sweep_cost_min.png')
line_chart('energy_jpb', 'network energy (J/bit)', 'sweep_energy.png')
line_chart('delay_spb', 'average delay (s/bit-batch)', 'sweep_delay.png')
line_chart('max_link_cost_jpb', 'worst single-link cost (J/bit)', 'sweep_worst_link.png')
line_chart('mean_power_w', 'mean transmit power (W)', 'sweep_power.png')
line_chart('iterations', 'iterations to converge', 'sweep_iterations.png', logy=False)

# Robustness view: cost gap between the mis-estimated and exact distributed runs.
if 'brd-perturbed' in schemes and 'brd-qos' in schemes:
    exact = {(r['pmax_dbw'], r['theta'], r['run']): r for r in rows if r['scheme'] == 'brd-qos'}
    gaps = defaultdict(list)
    for r in rows:
        if r['scheme'] != 'brd-perturbed':
            continue
        e = exact.get((r['pmax_dbw'], r['theta'], r['run']))
        if not e or not r['cost_sum_jpb'] or not e['cost_sum_jpb']:
            continue
        a, b = float(r['cost_sum_jpb']), float(e['cost_sum_jpb'])
        if math.isfinite(a) and math.isfinite(b):
            gaps[float(r['pmax_dbw'])].append(abs(a - b))
    if gaps:
        xs = sorted(gaps)
        plt.figure(figsize=(6, 4))
        plt.plot(xs, [sum(gaps[x]) / len(gaps[x]) for x in xs], marker='s')
        plt.yscale('log')
        plt.xlabel('transmit power budget (dBW)')
        plt.ylabel('cost gap from parameter error (J/bit)')
        plt.grid(True, which='both', alpha=0.3)
        plt.tight_layout()
        plt.savefig('sweep_perturbation_gap.png', dpi=150)
        plt.close()

print('charts written next to this script')
)";
  return s;
}

}  // namespace edpc
