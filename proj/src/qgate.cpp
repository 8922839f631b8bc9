// qgate: command-line scenario runner for the gate-bath toolkit.
//
//   qgate SCENARIO [--preset NAME] [--config FILE] [--set key=value]...
//         [--out DIR] [--workers N] [--seed N] [--check]
//
// Scenarios: trace, bath-table, fidelity-map, fidelity-scan,
// tp-theta-surface, relax-delay, coherence-crossover, optimize-pulse, fmo,
// audit.  `qgate SCENARIO --keys` lists the configuration keys a scenario
// understands, `qgate --list-presets` the frozen parameter sets.
//
// Configuration is a flat key/value namespace with dotted group prefixes
// (model.*, bath.*, pulse.*, run.*, plus scenario-specific groups).
// Precedence: built-in defaults < --preset < --config file < --set.  A config
// file is either `key = value` lines (# comments, blank lines ignored) or the
// JSON sidecar written next to every run's outputs; re-running from a sidecar
// reproduces the outputs byte for byte.  Unknown keys are rejected.
//
// Every run emits RFC-4180 CSVs (17 significant digits, '.' decimal), a JSON
// summary, the resolved-config sidecar, and a matplotlib stub script so that
// plotting stays out of process.  Exit codes: 0 success, 2 configuration
// error, 3 numerical failure, 4 failed --check.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gatebath/bath.hpp"
#include "gatebath/dissipators.hpp"
#include "gatebath/evolve.hpp"
#include "gatebath/fidelity.hpp"
#include "gatebath/operators.hpp"
#include "gatebath/pulseopt.hpp"
#include "gatebath/types.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace gatebath;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// formatting / CSV helpers

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// shortest representation that still round-trips; for labels and filenames
std::string fmt_short(double v) {
  char buf[40];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

struct CsvWriter {
  std::string body;
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) body += ',';
      body += csv_field(fields[i]);
    }
    body += "\r\n";
  }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// string / value parsing

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& val,
                            const char* want) {
  throw std::invalid_argument("config: key '" + key + "' has value '" + val +
                              "', expected " + want);
}

double parse_num(const std::string& key, const std::string& val) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(val, &pos);
    if (trim(val.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  bad_value(key, val, "a number");
}

int parse_int(const std::string& key, const std::string& val) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(val, &pos);
    if (trim(val.substr(pos)).empty()) return static_cast<int>(v);
  } catch (const std::exception&) {
  }
  bad_value(key, val, "an integer");
}

bool parse_bool(const std::string& key, const std::string& val) {
  if (val == "true" || val == "1") return true;
  if (val == "false" || val == "0") return false;
  bad_value(key, val, "true or false");
}

// Comma list "a,b,c" or inclusive range "lo:hi:n".
std::vector<double> parse_list(const std::string& key, const std::string& val) {
  std::vector<double> out;
  if (val.find(':') != std::string::npos) {
    const auto parts = split(val, ':');
    if (parts.size() != 3) bad_value(key, val, "lo:hi:n");
    const double lo = parse_num(key, trim(parts[0]));
    const double hi = parse_num(key, trim(parts[1]));
    const int n = parse_int(key, trim(parts[2]));
    if (n < 2) bad_value(key, val, "a range with n >= 2");
    for (int i = 0; i < n; ++i)
      out.push_back(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    return out;
  }
  for (const auto& piece : split(val, ','))
    if (!trim(piece).empty()) out.push_back(parse_num(key, trim(piece)));
  if (out.empty()) bad_value(key, val, "a non-empty list");
  return out;
}

// ---------------------------------------------------------------------------
// configuration model

struct KeyDef {
  const char* key;
  const char* def;
  const char* help;
};

using Config = std::map<std::string, std::string>;

struct Ctx {
  std::string scenario;
  Config cfg;
  fs::path out;
  int workers = 1;
  unsigned seed = 12345;
  bool check = false;
  std::vector<fs::path> written;
};

const std::string& get(const Ctx& c, const std::string& key) {
  const auto it = c.cfg.find(key);
  if (it == c.cfg.end())
    throw std::invalid_argument("config: missing key '" + key + "'");
  return it->second;
}

double num(const Ctx& c, const std::string& key) {
  return parse_num(key, get(c, key));
}
int num_int(const Ctx& c, const std::string& key) {
  return parse_int(key, get(c, key));
}
bool flag(const Ctx& c, const std::string& key) {
  return parse_bool(key, get(c, key));
}
std::vector<double> list(const Ctx& c, const std::string& key) {
  return parse_list(key, get(c, key));
}

// ---------------------------------------------------------------------------
// key tables

const std::vector<KeyDef> kModelKeys = {
    {"model.delta", "1", "level splitting"},
    {"model.xi", "0", "longitudinal coupling weight"},
    {"model.phi", "0", "transverse coupling angle"},
};
const std::vector<KeyDef> kBathKeys = {
    {"bath.lambda2", "0.02", "squared system-bath coupling"},
    {"bath.s", "1", "spectral exponent"},
    {"bath.omega_c", "1", "cutoff frequency"},
    {"bath.temperature", "0", "temperature (k_B = 1)"},
};
const std::vector<KeyDef> kPulseKeys = {
    {"pulse.theta", "1.5707963267948966", "rotation angle"},
    {"pulse.tau_p", "0", "pulse duration (0 = instantaneous)"},
    {"pulse.fourier", "", "shaping amplitudes a_1..a_7, comma list"},
};
const std::vector<KeyDef> kRunKeys = {
    {"run.t_end", "1000", "end of the integration window"},
    {"run.dt", "0.01", "integrator step"},
    {"run.stride", "20", "record every n-th step"},
    {"run.frame", "interaction", "schrodinger | interaction"},
    {"run.kinds", "gate,factorized,markov",
     "comma list of gate, factorized, markov, coarse"},
};

std::vector<KeyDef> cat(std::initializer_list<std::vector<KeyDef>> groups,
                        std::initializer_list<KeyDef> extra = {}) {
  std::vector<KeyDef> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

// ---------------------------------------------------------------------------
// builders

ModelSpec model_from(const Ctx& c) {
  ModelSpec m;
  m.delta = num(c, "model.delta");
  m.xi = num(c, "model.xi");
  m.phi = num(c, "model.phi");
  return m;
}

BathSpec bath_from(const Ctx& c) {
  BathSpec b;
  b.lambda2 = num(c, "bath.lambda2");
  b.s = num(c, "bath.s");
  b.omega_c = num(c, "bath.omega_c");
  b.temperature = num(c, "bath.temperature");
  return b;
}

PulseSpec pulse_from(const Ctx& c) {
  const double theta = num(c, "pulse.theta");
  const double tau = num(c, "pulse.tau_p");
  PulseSpec p = PulseSpec::square(theta, 0.0, tau);
  const auto it = c.cfg.find("pulse.fourier");
  const std::string four = it == c.cfg.end() ? std::string() : it->second;
  if (!trim(four).empty()) {
    const auto vals = parse_list("pulse.fourier", four);
    if (vals.size() > 7)
      bad_value("pulse.fourier", four, "at most 7 amplitudes");
    std::array<double, 7> a{};
    std::copy(vals.begin(), vals.end(), a.begin());
    p.fourier = a;
  }
  return p;
}

Frame frame_from(const Ctx& c) {
  const std::string f = get(c, "run.frame");
  if (f == "schrodinger") return Frame::Schrodinger;
  if (f == "interaction") return Frame::Interaction;
  bad_value("run.frame", f, "schrodinger or interaction");
}

RunKind kind_from(const std::string& name) {
  if (name == "gate") return RunKind::GatePlan;
  if (name == "factorized") return RunKind::Factorized;
  if (name == "markov") return RunKind::Markov;
  if (name == "coarse") return RunKind::CoarseGrained;
  bad_value("run.kinds", name, "gate, factorized, markov or coarse");
}

std::vector<std::pair<std::string, RunKind>> kinds_from(const Ctx& c) {
  std::vector<std::pair<std::string, RunKind>> out;
  for (const auto& piece : split(get(c, "run.kinds"), ',')) {
    const std::string name = trim(piece);
    if (name.empty()) continue;
    out.emplace_back(name, kind_from(name));
  }
  if (out.empty()) bad_value("run.kinds", get(c, "run.kinds"), "a kind list");
  return out;
}

SimConfig sim_from(const Ctx& c) {
  SimConfig cfg;
  cfg.model = model_from(c);
  cfg.bath = bath_from(c);
  cfg.pulse = pulse_from(c);
  cfg.t_end = num(c, "run.t_end");
  cfg.dt = num(c, "run.dt");
  cfg.record_stride = num_int(c, "run.stride");
  cfg.frame = frame_from(c);
  return cfg;
}

// ---------------------------------------------------------------------------
// worker pool: index fan-out with gather-then-write semantics

template <class Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// output helpers

void emit(Ctx& c, const std::string& name, const std::string& content) {
  const fs::path path = c.out / name;
  write_file(path, content);
  c.written.push_back(path);
  std::printf("wrote %s\n", path.string().c_str());
}

void emit_json(Ctx& c, const std::string& name, const json& j) {
  emit(c, name, j.dump(2) + "\n");
}

// Interpolation onto nearest recorded sample.
std::size_t nearest_index(const std::vector<double>& times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

std::string plot_preamble() {
  return R"(#!/usr/bin/env python3
"""Quick-look plots for the CSV outputs written next to this script."""
import csv
import math
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name), newline="") as fh:
        rows = list(csv.reader(fh))
    head, data = rows[0], rows[1:]
    cols = {}
    for i, h in enumerate(head):
        cols[h] = [float(r[i]) if r[i] not in ("", "nan") else math.nan
                   for r in data]
    return head, cols

)";
}

void emit_plot_stub(Ctx& c, const std::string& body) {
  emit(c, "plot_" + c.scenario + ".py", plot_preamble() + body);
}

// One "x column + every other column as a line" plot body.
std::string line_plot_body(const std::string& csv_name, const std::string& x,
                           const std::string& ylabel) {
  std::ostringstream os;
  os << "head, cols = load(\"" << csv_name << "\")\n"
     << "for name in head:\n"
     << "    if name != \"" << x << "\":\n"
     << "        plt.plot(cols[\"" << x << "\"], cols[name], label=name)\n"
     << "plt.xlabel(\"" << x << "\")\n"
     << "plt.ylabel(\"" << ylabel << "\")\n"
     << "plt.legend(fontsize=7)\n"
     << "plt.tight_layout()\n"
     << "plt.savefig(os.path.join(HERE, \"" << csv_name << ".png\"), dpi=160)\n"
     << "print(\"saved " << csv_name << ".png\")\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// scenario: trace

int run_trace(Ctx& c) {
  const SimConfig cfg = sim_from(c);
  const auto kinds = kinds_from(c);
  std::vector<Trajectory> trs(kinds.size());
  parallel_for(static_cast<int>(kinds.size()), c.workers,
               [&](int i) { trs[i] = integrate(cfg, kinds[i].second); });

  CsvWriter csv;
  std::vector<std::string> head = {"t"};
  for (const auto& [name, kind] : kinds) {
    (void)kind;
    head.push_back(name + "_nx");
    head.push_back(name + "_ny");
    head.push_back(name + "_nz");
    head.push_back(name + "_eps");
  }
  csv.row(head);
  const std::size_t rows = trs.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> fields = {fmt17(trs.front().times[r])};
    for (const auto& tr : trs) {
      fields.push_back(fmt17(tr.bloch[r](0)));
      fields.push_back(fmt17(tr.bloch[r](1)));
      fields.push_back(fmt17(tr.bloch[r](2)));
      fields.push_back(fmt17(tr.eps_min[r]));
    }
    csv.row(fields);
  }
  emit(c, c.scenario + ".csv", csv.body);

  json summary;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const PositivityReport rep = positivity_audit(trs[i]);
    json r = {{"min_eps", rep.min_eps},
              {"argmin_time", rep.argmin_time},
              {"pass", rep.pass}};
    r["first_negative_time"] =
        rep.first_negative_time ? json(*rep.first_negative_time) : json();
    summary["positivity"][kinds[i].first] = r;
  }
  emit_json(c, c.scenario + ".summary.json", summary);
  emit_plot_stub(c, line_plot_body(c.scenario + ".csv", "t", "bloch"));
  return 0;
}

// ---------------------------------------------------------------------------
// scenario: bath-table

int run_bath_table(Ctx& c) {
  const BathSpec bs = bath_from(c);
  const auto omegas = list(c, "table.omegas");
  const double t_max = num(c, "table.t_max");
  const double dt = num(c, "table.dt");
  if (!(t_max > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("bath-table: t_max and dt must be positive");
  const Bath b(bs, t_max + 1.0);

  CsvWriter csv;
  std::vector<std::string> head = {"t"};
  for (double w : omegas) {
    head.push_back("J(omega=" + fmt_short(w) + ")");
    head.push_back("S(omega=" + fmt_short(w) + ")");
  }
  csv.row(head);
  const int n = static_cast<int>(std::llround(t_max / dt));
  for (int i = 0; i <= n; ++i) {
    const double t = i * dt;
    std::vector<std::string> fields = {fmt17(t)};
    for (double w : omegas) {
      const cplx g = b.gamma(w, t);
      fields.push_back(fmt17(g.real()));
      fields.push_back(fmt17(g.imag()));
    }
    csv.row(fields);
  }
  emit(c, c.scenario + ".csv", csv.body);

  json summary;
  for (double w : omegas) {
    const cplx g = b.gamma_asymptotic(w);
    summary["asymptotic"]["J(omega=" + fmt_short(w) + ")"] = g.real();
    summary["asymptotic"]["S(omega=" + fmt_short(w) + ")"] = g.imag();
  }
  emit_json(c, c.scenario + ".summary.json", summary);
  emit_plot_stub(c, line_plot_body(c.scenario + ".csv", "t", "rate"));
  return 0;
}

// ---------------------------------------------------------------------------
// scenario: fidelity-map

int run_fidelity_map(Ctx& c) {
  SimConfig cfg;
  cfg.model = model_from(c);
  cfg.bath = bath_from(c);
  cfg.pulse = pulse_from(c);
  cfg.dt = num(c, "run.dt");
  cfg.record_stride = 1;
  cfg.frame = Frame::Interaction;
  const double t_req = num(c, "map.t");
  const double t_state = t_req > 0.0 ? t_req : cfg.pulse.tau_p2;
  cfg.t_end = std::max({t_state, cfg.pulse.tau_p2, cfg.dt});

  const Trajectory traj = integrate(cfg, RunKind::GatePlan);
  const std::size_t idx = nearest_index(traj.times, t_state);
  const Mat2 rho = density_from_bloch(traj.bloch[idx]);
  const FidelityMap map =
      fidelity_map(rho, num_int(c, "map.n_theta"), num_int(c, "map.n_phi"));
  const bool clip = flag(c, "map.clip");
  const double window = num(c, "map.window");
  const Eigen::MatrixXd values = clip ? ratio_clipped(map, window) : map.values;

  CsvWriter csv;
  std::vector<std::string> head = {"theta_phi"};
  for (int j = 0; j < map.phi_grid.size(); ++j)
    head.push_back(fmt17(map.phi_grid(j)));
  csv.row(head);
  for (int i = 0; i < map.theta_grid.size(); ++i) {
    std::vector<std::string> fields = {fmt17(map.theta_grid(i))};
    for (int j = 0; j < map.phi_grid.size(); ++j)
      fields.push_back(std::isnan(values(i, j)) ? "nan" : fmt17(values(i, j)));
    csv.row(fields);
  }
  emit(c, c.scenario + ".csv", csv.body);

  const json summary = {{"f_max", map.f_max},   {"theta_m", map.theta_m},
                        {"phi_m", map.phi_m},   {"state_time", traj.times[idx]},
                        {"clipped", clip},      {"window", window}};
  emit_json(c, c.scenario + ".summary.json", summary);

  std::ostringstream body;
  body << "head, cols = load(\"" << c.scenario << ".csv\")\n"
       << "phis = [float(h) for h in head[1:]]\n"
       << "thetas = cols[\"theta_phi\"]\n"
       << "grid = [[cols[h][i] for h in head[1:]] for i in range(len(thetas))]\n"
       << "plt.pcolormesh(phis, thetas, grid, shading=\"nearest\")\n"
       << "plt.xlabel(\"phi\")\n"
       << "plt.ylabel(\"theta\")\n"
       << "plt.colorbar(label=\"fidelity\")\n"
       << "plt.tight_layout()\n"
       << "plt.savefig(os.path.join(HERE, \"" << c.scenario
       << ".png\"), dpi=160)\n"
       << "print(\"saved " << c.scenario << ".png\")\n";
  emit_plot_stub(c, body.str());
  return 0;
}

// ---------------------------------------------------------------------------
// scenario: fidelity-scan

SimConfig scan_base(const Ctx& c) {
  SimConfig base;
  base.model = model_from(c);
  base.bath = bath_from(c);
  base.pulse = pulse_from(c);
  base.dt = num(c, "run.dt");
  base.record_stride = 1;
  base.frame = Frame::Interaction;
  base.t_end = std::max(base.pulse.tau_p2, base.dt);
  return base;
}

int run_fidelity_scan(Ctx& c) {
  const SimConfig base = scan_base(c);
  const auto thetas = list(c, "scan.thetas");
  std::vector<FidelityCurve> curves(thetas.size());
  parallel_for(static_cast<int>(thetas.size()), c.workers, [&](int i) {
    curves[i] = fidelity_scan_theta(base, {thetas[i]});
  });

  CsvWriter csv;
  csv.row({"theta", "f_target", "f_max", "theta_m", "phi_m"});
  double best = -1.0, best_theta = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const auto& cur = curves[i];
    csv.row({fmt17(cur.thetas[0]), fmt17(cur.f_target[0]), fmt17(cur.f_max[0]),
             fmt17(cur.theta_m[0]), fmt17(cur.phi_m[0])});
    if (cur.f_target[0] > best) {
      best = cur.f_target[0];
      best_theta = cur.thetas[0];
    }
  }
  emit(c, c.scenario + ".csv", csv.body);
  const json summary = {{"n_points", thetas.size()},
                        {"best_f_target", best},
                        {"best_theta", best_theta}};
  emit_json(c, c.scenario + ".summary.json", summary);
  emit_plot_stub(c, line_plot_body(c.scenario + ".csv", "theta", "fidelity"));
  return 0;
}

// ---------------------------------------------------------------------------
// scenario: tp-theta-surface

int run_tp_theta_surface(Ctx& c) {
  const SimConfig proto = scan_base(c);
  const auto taus = list(c, "surface.taus");
  const auto thetas = list(c, "surface.thetas");
  std::vector<FidelityCurve> rows(taus.size());
  parallel_for(static_cast<int>(taus.size()), c.workers, [&](int i) {
    SimConfig cfg = proto;
    cfg.pulse = PulseSpec::square(proto.pulse.theta, 0.0, taus[i]);
    cfg.t_end = taus[i];
    rows[i] = fidelity_scan_theta(cfg, thetas);
  });

  const auto matrix_csv = [&](const char* which, auto select) {
    CsvWriter csv;
    std::vector<std::string> head = {"tau_p_theta"};
    for (double th : thetas) head.push_back(fmt17(th));
    csv.row(head);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      std::vector<std::string> fields = {fmt17(taus[i])};
      for (std::size_t j = 0; j < thetas.size(); ++j)
        fields.push_back(fmt17(select(rows[i], j)));
      csv.row(fields);
    }
    emit(c, c.scenario + std::string("_") + which + ".csv", csv.body);
  };
  matrix_csv("fmax",
             [](const FidelityCurve& r, std::size_t j) { return r.f_max[j]; });
  matrix_csv("ftarget", [](const FidelityCurve& r, std::size_t j) {
    return r.f_target[j];
  });

  double best = -1.0, best_tau = 0.0, best_theta = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i)
    for (std::size_t j = 0; j < thetas.size(); ++j)
      if (rows[i].f_max[j] > best) {
        best = rows[i].f_max[j];
        best_tau = taus[i];
        best_theta = thetas[j];
      }
  const json summary = {{"best_f_max", best},
                        {"best_tau_p", best_tau},
                        {"best_theta", best_theta}};
  emit_json(c, c.scenario + ".summary.json", summary);

  std::ostringstream body;
  body << "head, cols = load(\"" << c.scenario << "_fmax.csv\")\n"
       << "thetas = [float(h) for h in head[1:]]\n"
       << "taus = cols[\"tau_p_theta\"]\n"
       << "grid = [[cols[h][i] for h in head[1:]] for i in range(len(taus))]\n"
       << "plt.pcolormesh(thetas, taus, grid, shading=\"nearest\")\n"
       << "plt.xlabel(\"theta\")\n"
       << "plt.ylabel(\"tau_p\")\n"
       << "plt.colorbar(label=\"best fidelity\")\n"
       << "plt.tight_layout()\n"
       << "plt.savefig(os.path.join(HERE, \"" << c.scenario
       << ".png\"), dpi=160)\n"
       << "print(\"saved " << c.scenario << ".png\")\n";
  emit_plot_stub(c, body.str());
  return 0;
}

// ---------------------------------------------------------------------------
// scenario: relax-delay

int run_relax_delay(Ctx& c) {
  const ModelSpec m = model_from(c);
  const BathSpec bs = bath_from(c);
  const double theta = num(c, "pulse.theta");
  const double dt0 = num(c, "run.dt");
  const int stride = num_int(c, "run.stride");
  const double f0 = num(c, "delay.fit_t0");
  const double f1 = num(c, "delay.fit_t1");
  if (!(f1 > f0) || !(f0 >= 0.0))
    throw std::invalid_argument("relax-delay: need 0 <= fit_t0 < fit_t1");
  const auto taus = list(c, "delay.taus");
  const double t_floor = num(c, "run.t_end");

  const auto run_one = [&](const PulseSpec& p, RunKind kind, double gate_time,
                           double* delay) {
    SimConfig cfg;
    cfg.model = m;
    cfg.bath = bs;
    cfg.pulse = p;
    cfg.t_end = std::max(t_floor, gate_time + f1 + 10.0);
    cfg.dt = dt0;
    if (std::isfinite(p.omega_p) && p.omega_p != 0.0)
      cfg.dt = std::min(cfg.dt, 0.02 * 2.0 * pi / std::abs(p.omega_p) /
                                    (1.0 + 1e-9));
    cfg.record_stride = stride;
    cfg.frame = Frame::Schrodinger;
    const Bath b(bs, cfg.t_end + 1.0);
    const Trajectory traj = integrate(cfg, b, kind);
    *delay = relaxation_delay(traj, m, b, gate_time, gate_time + f0,
                              gate_time + f1);
  };

  std::vector<double> delays(taus.size());
  parallel_for(static_cast<int>(taus.size()), c.workers, [&](int i) {
    run_one(PulseSpec::square(theta, 0.0, taus[i]), RunKind::GatePlan, taus[i],
            &delays[i]);
  });
  double delay_fact = 0.0, delay_markov = 0.0;
  const PulseSpec instant = PulseSpec::square(theta, 0.0, 0.0);
  run_one(instant, RunKind::Factorized, 0.0, &delay_fact);
  run_one(instant, RunKind::Markov, 0.0, &delay_markov);

  CsvWriter csv;
  csv.row({"tau_p", "delay"});
  for (std::size_t i = 0; i < taus.size(); ++i)
    csv.row({fmt17(taus[i]), fmt17(delays[i])});
  emit(c, c.scenario + ".csv", csv.body);

  // first crossing of the midpoint between the two reference levels,
  // interpolated on a log-tau axis
  const double mid = 0.5 * (delay_fact + delay_markov);
  json crossover;
  for (std::size_t i = 1; i < taus.size(); ++i) {
    const bool hi = delays[i - 1] > mid, lo = delays[i] <= mid;
    if (hi && lo) {
      const double w =
          (delays[i - 1] - mid) / (delays[i - 1] - delays[i]);
      crossover = std::exp(std::log(taus[i - 1]) +
                           w * (std::log(taus[i]) - std::log(taus[i - 1])));
      break;
    }
  }
  const json summary = {{"factorized_delay", delay_fact},
                        {"markov_delay", delay_markov},
                        {"midpoint", mid},
                        {"crossover_tau_p", crossover}};
  emit_json(c, c.scenario + ".summary.json", summary);
  emit_plot_stub(c, line_plot_body(c.scenario + ".csv", "tau_p", "delay"));
  return 0;
}

// ---------------------------------------------------------------------------
// scenario: coherence-crossover

int run_coherence_crossover(Ctx& c) {
  const ModelSpec m = model_from(c);
  const BathSpec bs = bath_from(c);
  const double theta = num(c, "pulse.theta");
  const double dt0 = num(c, "run.dt");
  const int stride = num_int(c, "run.stride");
  const auto taus = list(c, "cross.taus");
  const auto offsets = list(c, "cross.offsets");
  const double max_off = *std::max_element(offsets.begin(), offsets.end());

  const auto perp_at = [&](const Trajectory& traj, double t) {
    const std::size_t i = nearest_index(traj.times, t);
    return std::hypot(traj.bloch[i](0), traj.bloch[i](1));
  };
  const auto run_one = [&](const PulseSpec& p, RunKind kind, double gate_time,
                           std::vector<double>* vals) {
    SimConfig cfg;
    cfg.model = m;
    cfg.bath = bs;
    cfg.pulse = p;
    cfg.t_end = gate_time + max_off + 1.0;
    cfg.dt = dt0;
    if (std::isfinite(p.omega_p) && p.omega_p != 0.0)
      cfg.dt = std::min(cfg.dt, 0.02 * 2.0 * pi / std::abs(p.omega_p) /
                                    (1.0 + 1e-9));
    cfg.record_stride = stride;
    cfg.frame = Frame::Interaction;
    const Trajectory traj = integrate(cfg, kind);
    vals->clear();
    for (double off : offsets) vals->push_back(perp_at(traj, gate_time + off));
  };

  std::vector<std::vector<double>> dp(taus.size());
  parallel_for(static_cast<int>(taus.size()), c.workers, [&](int i) {
    run_one(PulseSpec::square(theta, 0.0, taus[i]), RunKind::GatePlan, taus[i],
            &dp[i]);
  });
  std::vector<double> fact, markov;
  const PulseSpec instant = PulseSpec::square(theta, 0.0, 0.0);
  run_one(instant, RunKind::Factorized, 0.0, &fact);
  run_one(instant, RunKind::Markov, 0.0, &markov);

  CsvWriter csv;
  std::vector<std::string> head = {"tau_p"};
  for (double off : offsets) head.push_back("nperp(offset=" + fmt_short(off) + ")");
  csv.row(head);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    std::vector<std::string> fields = {fmt17(taus[i])};
    for (double v : dp[i]) fields.push_back(fmt17(v));
    csv.row(fields);
  }
  emit(c, c.scenario + ".csv", csv.body);

  json summary;
  json cross_list = json::array();
  double log_sum = 0.0;
  int log_n = 0;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const std::string key = "offset=" + fmt_short(offsets[k]);
    summary["factorized"][key] = fact[k];
    summary["markov"][key] = markov[k];
    const double mid = 0.5 * (fact[k] + markov[k]);
    json cross;
    for (std::size_t i = 1; i < taus.size(); ++i) {
      const double a = dp[i - 1][k], b2 = dp[i][k];
      if ((a - mid) * (b2 - mid) <= 0.0 && a != b2) {
        const double w = (a - mid) / (a - b2);
        const double t = std::exp(std::log(taus[i - 1]) +
                                  w * (std::log(taus[i]) -
                                       std::log(taus[i - 1])));
        cross = t;
        log_sum += std::log(t);
        ++log_n;
        break;
      }
    }
    cross_list.push_back(cross);
    summary["crossover_tau_p"][key] = cross;
  }
  summary["crossover_tau_p_geomean"] =
      log_n ? json(std::exp(log_sum / log_n)) : json();
  emit_json(c, c.scenario + ".summary.json", summary);
  emit_plot_stub(c, line_plot_body(c.scenario + ".csv", "tau_p", "|n_perp|"));
  return 0;
}

// ---------------------------------------------------------------------------
// scenario: optimize-pulse

int run_optimize_pulse(Ctx& c) {
  const ModelSpec m = model_from(c);
  const BathSpec bs = bath_from(c);
  const PulseSpec p = pulse_from(c);
  if (p.instantaneous())
    throw std::invalid_argument("optimize-pulse: needs a finite pulse window");
  const int budget = num_int(c, "opt.budget");
  const int substeps = num_int(c, "opt.substeps");
  const bool with_fidelity = flag(c, "opt.fidelity");

  const Bath b(bs, p.tau_p2 + 1.0);
  const double baseline = objective({}, m, b, p, substeps);
  const OptResult res = optimize(m, b, p, {}, budget, substeps, c.seed);

  json fid;
  if (with_fidelity) {
    SimConfig base = scan_base(c);
    const FidelityCurve before = fidelity_scan_theta(base, {p.theta});
    base.pulse.fourier = res.a;
    const FidelityCurve after = fidelity_scan_theta(base, {p.theta});
    fid = {{"target_before", before.f_target[0]},
           {"target_after", after.f_target[0]},
           {"best_before", before.f_max[0]},
           {"best_after", after.f_max[0]}};
  }

  PulseSpec shaped = p;
  shaped.fourier = res.a;
  CsvWriter csv;
  csv.row({"t", "eps_square", "eps_optimized"});
  const int n_plot = 1000;
  for (int i = 0; i <= n_plot; ++i) {
    const double t = p.tau_p1 + p.duration() * i / n_plot;
    csv.row({fmt17(t), fmt17(pulse_amplitude(p, t)),
             fmt17(pulse_amplitude(shaped, t))});
  }
  emit(c, c.scenario + ".csv", csv.body);

  json summary = {{"baseline_objective", baseline},
                  {"objective", res.objective},
                  {"objective_ratio", res.objective / baseline},
                  {"iterations", res.iterations},
                  {"converged", res.converged},
                  {"a", res.a}};
  if (with_fidelity) summary["fidelity"] = fid;
  emit_json(c, c.scenario + ".summary.json", summary);
  emit_plot_stub(c, line_plot_body(c.scenario + ".csv", "t", "drive"));
  return 0;
}

// ---------------------------------------------------------------------------
// scenario: fmo

int run_fmo(Ctx& c) {
  const double delta_cm = num(c, "fmo.delta_cm");
  const double u_cm = num(c, "fmo.u_cm");
  const double omega_c_cm = num(c, "fmo.omega_c_cm");
  const double lambda2 = num(c, "fmo.lambda2");
  const auto temps = list(c, "fmo.temps_k");
  const auto s_list = list(c, "fmo.s_list");
  const double t_end = num(c, "fmo.t_end");
  const double dt = num(c, "fmo.dt");
  const int stride = num_int(c, "fmo.stride");
  const double win_lo = num(c, "fmo.win_lo");
  if (!(delta_cm > 0.0) || !(u_cm > 0.0) || !(omega_c_cm > 0.0))
    throw std::invalid_argument("fmo: energies must be positive");

  // dimensionless mapping: energies in units of the splitting
  constexpr double kB_cm_per_K = 0.69503480;     // k_B in cm^-1 / K
  constexpr double c_cm_per_s = 2.99792458e10;   // speed of light
  ModelSpec m;
  m.delta = 1.0;
  m.xi = delta_cm / (2.0 * u_cm);
  m.phi = 0.0;
  const double omega_c = omega_c_cm / delta_cm;
  const double fs_per_unit = 1e15 / (2.0 * pi * c_cm_per_s * delta_cm);

  struct Task {
    double temp_k = 0.0, s = 0.0;
    Trajectory dp, fact;
  };
  std::vector<Task> tasks;
  for (double tk : temps)
    for (double s : s_list) tasks.push_back({tk, s, {}, {}});

  parallel_for(static_cast<int>(tasks.size()), c.workers, [&](int i) {
    Task& task = tasks[i];
    BathSpec bs;
    bs.lambda2 = lambda2;
    bs.s = task.s;
    bs.omega_c = omega_c;
    bs.temperature = kB_cm_per_K * task.temp_k / delta_cm;
    SimConfig cfg;
    cfg.model = m;
    cfg.bath = bs;
    cfg.pulse = PulseSpec::square(pi / 2.0, 0.0, 0.0);
    cfg.t_end = t_end;
    cfg.dt = dt;
    cfg.record_stride = stride;
    cfg.frame = Frame::Schrodinger;
    const Bath b(bs, t_end + 2.0);
    task.dp = integrate(cfg, b, RunKind::GatePlan);
    task.fact = integrate(cfg, b, RunKind::Factorized);
  });

  json summary;
  summary["xi"] = m.xi;
  summary["omega_c"] = omega_c;
  summary["fs_per_unit"] = fs_per_unit;
  for (double tk : temps) {
    CsvWriter csv;
    std::vector<std::string> head = {"t", "t_fs"};
    for (double s : s_list) {
      head.push_back("dp_nx(s=" + fmt_short(s) + ")");
      head.push_back("fact_nx(s=" + fmt_short(s) + ")");
    }
    csv.row(head);
    const Task* first = nullptr;
    std::vector<const Task*> cols;
    for (const auto& task : tasks)
      if (task.temp_k == tk) {
        cols.push_back(&task);
        if (!first) first = &task;
      }
    const std::size_t rows = first->dp.size();
    for (std::size_t r = 0; r < rows; ++r) {
      const double t = first->dp.times[r];
      std::vector<std::string> fields = {fmt17(t), fmt17(t * fs_per_unit)};
      for (const Task* task : cols) {
        fields.push_back(fmt17(task->dp.bloch[r](0)));
        fields.push_back(fmt17(task->fact.bloch[r](0)));
      }
      csv.row(fields);
    }
    const std::string name = "fmo_T" + fmt_short(tk) + "K.csv";
    emit(c, name, csv.body);

    for (const Task* task : cols) {
      // strongly biased + strongly coupled runs can leave the regime where
      // the dynamically-prepared generator is contractive; flag the blow-up
      // instead of reporting maxima over a runaway tail
      json valid_until;
      std::size_t valid = rows;
      for (std::size_t r = 0; r < rows; ++r)
        if (!task->dp.bloch[r].allFinite() || task->dp.bloch[r].norm() > 1e6) {
          valid = r;
          valid_until = task->dp.times[r];
          break;
        }
      double dp_max = 0.0, fact_max = 0.0, excess = -1.0;
      bool any = false;
      for (std::size_t r = 0; r < valid; ++r) {
        if (task->dp.times[r] < win_lo) continue;
        any = true;
        const double a = std::abs(task->dp.bloch[r](0));
        const double f = std::abs(task->fact.bloch[r](0));
        dp_max = std::max(dp_max, a);
        fact_max = std::max(fact_max, f);
        excess = std::max(excess, a - f);
      }
      json entry = {{"dp_diverged", valid < rows},
                    {"dp_valid_until", valid_until}};
      entry["dp_late_max"] = any ? json(dp_max) : json();
      entry["fact_late_max"] = any ? json(fact_max) : json();
      entry["dp_minus_fact_max"] = any ? json(excess) : json();
      summary["T=" + fmt_short(tk) + "K"]["s=" + fmt_short(task->s)] = entry;
    }
  }
  emit_json(c, c.scenario + ".summary.json", summary);

  std::ostringstream body;
  body << "for name in [";
  for (std::size_t i = 0; i < temps.size(); ++i)
    body << (i ? ", " : "") << "\"fmo_T" << fmt_short(temps[i]) << "K.csv\"";
  body << "]:\n"
       << "    head, cols = load(name)\n"
       << "    plt.figure()\n"
       << "    for h in head[2:]:\n"
       << "        plt.plot(cols[\"t_fs\"], cols[h], label=h)\n"
       << "    plt.xlabel(\"t (fs)\")\n"
       << "    plt.ylabel(\"n_x\")\n"
       << "    plt.legend(fontsize=6)\n"
       << "    plt.tight_layout()\n"
       << "    plt.savefig(os.path.join(HERE, name + \".png\"), dpi=160)\n"
       << "    print(\"saved\", name + \".png\")\n";
  emit_plot_stub(c, body.str());
  return 0;
}

// ---------------------------------------------------------------------------
// scenario: audit

int run_audit(Ctx& c) {
  const SimConfig cfg = sim_from(c);
  const auto kinds = kinds_from(c);
  std::vector<Trajectory> trs(kinds.size());
  parallel_for(static_cast<int>(kinds.size()), c.workers,
               [&](int i) { trs[i] = integrate(cfg, kinds[i].second); });

  CsvWriter csv;
  std::vector<std::string> head = {"t"};
  for (const auto& [name, kind] : kinds) {
    (void)kind;
    head.push_back(name + "_eps");
  }
  csv.row(head);
  const std::size_t rows = trs.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> fields = {fmt17(trs.front().times[r])};
    for (const auto& tr : trs) fields.push_back(fmt17(tr.eps_min[r]));
    csv.row(fields);
  }
  emit(c, c.scenario + ".csv", csv.body);

  json summary;
  std::map<std::string, PositivityReport> reports;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const PositivityReport rep = positivity_audit(trs[i]);
    reports[kinds[i].first] = rep;
    json r = {{"min_eps", rep.min_eps},
              {"argmin_time", rep.argmin_time},
              {"pass", rep.pass}};
    r["first_negative_time"] =
        rep.first_negative_time ? json(*rep.first_negative_time) : json();
    summary["positivity"][kinds[i].first] = r;
  }

  int rc = 0;
  if (c.check) {
    const std::string kind = get(c, "audit.kind");
    if (!reports.count(kind))
      throw std::invalid_argument("audit: audit.kind '" + kind +
                                  "' is not among run.kinds");
    const PositivityReport& rep = reports.at(kind);
    const double floor = num(c, "audit.floor");
    const double dip_lo = num(c, "audit.dip_lo");
    const double dip_hi = num(c, "audit.dip_hi");
    const bool ok_floor = rep.min_eps >= floor;
    bool ok_dip = true;
    const bool want_dip = dip_hi > dip_lo;
    if (want_dip)
      ok_dip = rep.min_eps < 0.0 && rep.argmin_time >= dip_lo &&
               rep.argmin_time <= dip_hi;
    std::printf("check floor (min_eps %.3e >= %.3e): %s\n", rep.min_eps, floor,
                ok_floor ? "pass" : "FAIL");
    if (want_dip)
      std::printf("check dip (min_eps < 0 at t in [%g, %g], argmin %.6g): %s\n",
                  dip_lo, dip_hi, rep.argmin_time, ok_dip ? "pass" : "FAIL");
    summary["check"] = {{"kind", kind},
                        {"floor", floor},
                        {"floor_pass", ok_floor},
                        {"dip_required", want_dip},
                        {"dip_pass", ok_dip},
                        {"pass", ok_floor && ok_dip}};
    rc = (ok_floor && ok_dip) ? 0 : 4;
  }
  emit_json(c, c.scenario + ".summary.json", summary);
  emit_plot_stub(c, line_plot_body(c.scenario + ".csv", "t", "eps_min"));
  return rc;
}

// ---------------------------------------------------------------------------
// scenario registry

struct Scenario {
  const char* name;
  const char* blurb;
  std::vector<KeyDef> keys;
  int (*run)(Ctx&);
};

const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> table = {
      {"trace",
       "integrate the configured run kinds and dump Bloch trajectories",
       cat({kModelKeys, kBathKeys, kPulseKeys, kRunKeys}), run_trace},
      {"bath-table",
       "tabulate the cumulative rates J_w(t), S_w(t) for a list of omegas",
       cat({kBathKeys},
           {{"table.omegas", "-1,0,1", "frequencies, comma list"},
            {"table.t_max", "200", "last tabulated time"},
            {"table.dt", "0.1", "table step"}}),
       run_bath_table},
      {"fidelity-map",
       "fidelity landscape over pure-target Bloch angles for one final state",
       cat({kModelKeys, kBathKeys, kPulseKeys},
           {{"run.dt", "0.01", "integrator step"},
            {"map.t", "0", "state time (0 = end of pulse)"},
            {"map.n_theta", "181", "polar grid size"},
            {"map.n_phi", "361", "azimuth grid size"},
            {"map.clip", "false", "blank entries below window * f_max"},
            {"map.window", "0.98", "clip window"}}),
       run_fidelity_map},
      {"fidelity-scan",
       "end-of-pulse fidelity against ideal and best targets vs theta",
       cat({kModelKeys, kBathKeys, kPulseKeys},
           {{"run.dt", "0.01", "integrator step"},
            {"scan.thetas", "0:6.2831853071795862:65",
             "rotation angles (list or lo:hi:n)"}}),
       run_fidelity_scan},
      {"tp-theta-surface",
       "best-target fidelity over a (pulse length, angle) grid",
       cat({kModelKeys, kBathKeys, kPulseKeys},
           {{"run.dt", "0.01", "integrator step"},
            {"surface.taus", "12.5,25,50,100,200", "pulse durations"},
            {"surface.thetas", "0:6.2831853071795862:33", "rotation angles"}}),
       run_tp_theta_surface},
      {"relax-delay",
       "relaxation delay vs pulse duration with factorized/Markov references",
       cat({kModelKeys, kBathKeys},
           {{"pulse.theta", "3.1415926535897931", "rotation angle"},
            {"run.t_end", "120", "minimum integration end"},
            {"run.dt", "0.01", "integrator step"},
            {"run.stride", "10", "record every n-th step"},
            {"delay.taus", "0.125,0.25,0.5,1,2,4,8,16,32", "pulse durations"},
            {"delay.fit_t0", "30", "fit window start (after gate end)"},
            {"delay.fit_t1", "80", "fit window end (after gate end)"}}),
       run_relax_delay},
      {"coherence-crossover",
       "post-gate |n_perp| at fixed offsets vs pulse duration",
       cat({kModelKeys, kBathKeys},
           {{"pulse.theta", "1.5707963267948966", "rotation angle"},
            {"run.dt", "0.01", "integrator step"},
            {"run.stride", "10", "record every n-th step"},
            {"cross.taus", "1,2,3,5,7,10,15,20,30,45,70,100,150,220,300",
             "pulse durations"},
            {"cross.offsets", "20,40,60,80", "sampling offsets after the gate"}}),
       run_coherence_crossover},
      {"optimize-pulse",
       "shape the drive to minimize the window dissipator norm",
       cat({kModelKeys, kBathKeys,
            {{"pulse.theta", "1.5707963267948966", "rotation angle"},
             {"pulse.tau_p", "200", "pulse duration"}}},
           {{"run.dt", "0.01", "integrator step (fidelity runs)"},
            {"opt.budget", "2000", "objective evaluation budget"},
            {"opt.substeps", "1000", "window grid points (0 = auto)"},
            {"opt.fidelity", "true", "also run before/after fidelity"}}),
       run_optimize_pulse},
      {"fmo",
       "excitonic-dimer mapping: gate-prepared vs factorized coherence",
       {{"fmo.delta_cm", "250", "level splitting in 1/cm"},
        {"fmo.u_cm", "10", "inter-site coupling in 1/cm"},
        {"fmo.omega_c_cm", "100", "bath cutoff in 1/cm"},
        {"fmo.lambda2", "0.25", "squared system-bath coupling"},
        {"fmo.temps_k", "77,300", "temperatures in kelvin"},
        {"fmo.s_list", "1,0.97,0.93,0.9", "spectral exponents"},
        {"fmo.t_end", "50", "end time (units of 1/splitting)"},
        {"fmo.dt", "0.001", "integrator step"},
        {"fmo.stride", "50", "record every n-th step"},
        {"fmo.win_lo", "10", "late-window start for the summary maxima"}},
       run_fmo},
      {"audit",
       "positivity audit of the smaller density-matrix eigenvalue",
       cat({kModelKeys, kBathKeys, kPulseKeys, kRunKeys},
           {{"audit.kind", "gate", "kind the --check applies to"},
            {"audit.floor", "-0.02", "required min_eps floor"},
            {"audit.dip_lo", "0", "dip window start (0,0 = no dip check)"},
            {"audit.dip_hi", "0", "dip window end"}}),
       run_audit},
  };
  return table;
}

const Scenario& find_scenario(const std::string& name) {
  for (const auto& s : scenarios())
    if (name == s.name) return s;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// presets: parameter sets frozen for the study figures

struct Preset {
  const char* name;
  const char* scenario;
  std::vector<std::pair<const char*, const char*>> kv;
};

const std::vector<Preset>& presets() {
  // shorthand for the shared instant-gate trace block
  static const std::vector<std::pair<const char*, const char*>> kInstant = {
      {"pulse.theta", "1.5707963267948966"},
      {"pulse.tau_p", "0"},
      {"run.t_end", "1000"},
      {"run.dt", "0.01"},
      {"run.stride", "20"},
      {"run.frame", "interaction"},
      {"run.kinds", "gate,factorized,markov"},
  };
  static const std::vector<Preset> table = [] {
    std::vector<Preset> t;
    const auto trace_preset = [&](const char* name, const char* lambda2,
                                  const char* xi, const char* temp,
                                  std::vector<std::pair<const char*,
                                                        const char*>> extra) {
      Preset p{name, "trace", {}};
      p.kv = {{"bath.lambda2", lambda2},
              {"bath.s", "1"},
              {"bath.temperature", temp},
              {"model.xi", xi}};
      p.kv.insert(p.kv.end(), kInstant.begin(), kInstant.end());
      for (const auto& e : extra) {
        bool replaced = false;
        for (auto& kv : p.kv)
          if (std::string(kv.first) == e.first) {
            kv.second = e.second;
            replaced = true;
          }
        if (!replaced) p.kv.push_back(e);
      }
      t.push_back(std::move(p));
    };

    // instant-gate coherence traces at increasing longitudinal coupling
    trace_preset("fig3a", "0.02", "1", "0", {});
    trace_preset("fig3b", "0.02", "2", "0", {});
    trace_preset("fig3c", "0.02", "4", "0", {});
    // dephasing transition vs pulse duration (gate kind only: the
    // factorized/Markov references use an instant pulse, see fig4ref)
    trace_preset("fig4a", "0.002", "4", "0",
                 {{"pulse.tau_p", "1"},
                  {"run.t_end", "2000"},
                  {"run.stride", "100"},
                  {"run.kinds", "gate"}});
    trace_preset("fig4b", "0.002", "4", "0",
                 {{"pulse.tau_p", "30"},
                  {"run.t_end", "2000"},
                  {"run.stride", "100"},
                  {"run.kinds", "gate"}});
    trace_preset("fig4c", "0.002", "4", "0",
                 {{"pulse.tau_p", "300"},
                  {"run.t_end", "2000"},
                  {"run.stride", "100"},
                  {"run.kinds", "gate"}});
    trace_preset("fig4ref", "0.002", "4", "0",
                 {{"run.t_end", "2000"}, {"run.stride", "100"}});
    // temperature sweep of the coherence recovery
    trace_preset("fig5a", "0.02", "4", "0", {});
    trace_preset("fig5b", "0.02", "4", "0.005", {});
    trace_preset("fig5c", "0.02", "4", "0.02", {});
    // coarse-grained cross-check
    trace_preset("fig11", "0.02", "0", "0", {{"run.kinds", "gate,coarse"}});

    t.push_back({"fig6a",
                 "relax-delay",
                 {{"bath.lambda2", "0.001"},
                  {"bath.s", "1"},
                  {"model.xi", "0"},
                  {"pulse.theta", "3.1415926535897931"}}});
    t.push_back({"fig6b",
                 "coherence-crossover",
                 {{"bath.lambda2", "0.001"},
                  {"bath.s", "1"},
                  {"model.xi", "4"},
                  {"pulse.theta", "1.5707963267948966"}}});
    t.push_back({"fig7a",
                 "fidelity-map",
                 {{"bath.lambda2", "1e-05"},
                  {"bath.s", "1"},
                  {"model.xi", "1"},
                  {"pulse.theta", "1.5707963267948966"},
                  {"pulse.tau_p", "200"},
                  {"map.clip", "true"}}});
    t.push_back({"fig7b",
                 "fidelity-map",
                 {{"bath.lambda2", "1e-05"},
                  {"bath.s", "1"},
                  {"model.xi", "1"},
                  {"pulse.theta", "4.7123889803846897"},
                  {"pulse.tau_p", "200"},
                  {"map.clip", "true"}}});
    const auto scan_preset = [&](const char* name, const char* xi) {
      t.push_back({name,
                   "fidelity-scan",
                   {{"bath.lambda2", "1e-05"},
                    {"bath.s", "1"},
                    {"model.xi", xi},
                    {"pulse.tau_p", "200"}}});
    };
    scan_preset("fig8", "4");
    scan_preset("fig8xi0", "0");
    scan_preset("fig8xi1", "1");
    scan_preset("fig8xi2", "2");
    t.push_back({"fig9",
                 "tp-theta-surface",
                 {{"bath.lambda2", "1e-05"},
                  {"bath.s", "1"},
                  {"model.xi", "2"}}});
    t.push_back({"fig10",
                 "optimize-pulse",
                 {{"bath.lambda2", "1e-05"},
                  {"bath.s", "0.5"},
                  {"pulse.theta", "1.5707963267948966"},
                  {"pulse.tau_p", "200"}}});
    t.push_back({"fig12c",
                 "audit",
                 {{"bath.lambda2", "0.02"},
                  {"bath.s", "1"},
                  {"bath.temperature", "0"},
                  {"model.xi", "4"},
                  {"pulse.theta", "1.5707963267948966"},
                  {"pulse.tau_p", "0"},
                  {"run.t_end", "400"},
                  {"run.dt", "0.01"},
                  {"run.stride", "20"},
                  {"run.frame", "interaction"},
                  {"run.kinds", "gate,factorized"},
                  {"audit.kind", "gate"},
                  {"audit.floor", "-0.02"},
                  {"audit.dip_lo", "100"},
                  {"audit.dip_hi", "400"}}});
    t.push_back({"fig12d",
                 "audit",
                 {{"bath.lambda2", "0.02"},
                  {"bath.s", "1"},
                  {"bath.temperature", "0.0025"},
                  {"model.xi", "4"},
                  {"pulse.theta", "1.5707963267948966"},
                  {"pulse.tau_p", "0"},
                  {"run.t_end", "400"},
                  {"run.dt", "0.01"},
                  {"run.stride", "20"},
                  {"run.frame", "interaction"},
                  {"run.kinds", "gate,factorized"},
                  {"audit.kind", "gate"},
                  {"audit.floor", "-1e-06"},
                  {"audit.dip_lo", "0"},
                  {"audit.dip_hi", "0"}}});
    t.push_back({"fig13", "fmo", {}});
    return t;
  }();
  return table;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (name == p.name) return p;
  throw std::invalid_argument("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// config assembly

Config defaults_for(const Scenario& sc) {
  Config cfg;
  for (const auto& k : sc.keys) cfg[k.key] = k.def;
  return cfg;
}

void check_known(const Scenario& sc, const Config& cfg) {
  for (const auto& [key, val] : cfg) {
    (void)val;
    const bool known =
        std::any_of(sc.keys.begin(), sc.keys.end(),
                    [&](const KeyDef& k) { return key == k.key; });
    if (!known)
      throw std::invalid_argument("config: unknown key '" + key +
                                  "' for scenario '" + sc.name + "'");
  }
}

// Flat `key = value` lines or a JSON sidecar.  Returns the sidecar seed when
// one is present.
std::optional<unsigned> load_config_file(const std::string& path,
                                         const std::string& scenario,
                                         Config* cfg) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot read file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json side;
    try {
      side = json::parse(text);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config: bad JSON in '" + path +
                                  "': " + e.what());
    }
    if (side.contains("scenario") &&
        side["scenario"].get<std::string>() != scenario)
      throw std::invalid_argument(
          "config: sidecar was written by scenario '" +
          side["scenario"].get<std::string>() + "', not '" + scenario + "'");
    if (!side.contains("config") || !side["config"].is_object())
      throw std::invalid_argument("config: sidecar lacks a config object");
    for (const auto& [key, val] : side["config"].items())
      (*cfg)[key] = val.get<std::string>();
    if (side.contains("seed")) return side["seed"].get<unsigned>();
    return std::nullopt;
  }
  std::istringstream lines(text);
  std::string line;
  int ln = 0;
  while (std::getline(lines, line)) {
    ++ln;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(ln) +
                                  " of '" + path + "' is not key = value");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config: empty key at line " +
                                  std::to_string(ln) + " of '" + path + "'");
    (*cfg)[key] = trim(body.substr(eq + 1));
  }
  return std::nullopt;
}

void write_sidecar(Ctx& c) {
  json side;
  side["version"] = kVersion;
  side["scenario"] = c.scenario;
  side["seed"] = c.seed;
  json conf = json::object();
  for (const auto& [key, val] : c.cfg) conf[key] = val;
  side["config"] = conf;
  emit_json(c, c.scenario + ".config.json", side);
}

void print_keys(const Scenario& sc) {
  std::printf("%s: %s\n", sc.name, sc.blurb);
  for (const auto& k : sc.keys)
    std::printf("  %-22s default %-24s %s\n", k.key,
                k.def[0] ? k.def : "(empty)", k.help);
}

void print_presets() {
  for (const auto& p : presets()) {
    std::printf("%-10s %s\n", p.name, p.scenario);
    for (const auto& [key, val] : p.kv)
      std::printf("    %s = %s\n", key, val);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgate: scenario runner for the gate-bath toolkit"};
  app.set_version_flag("--version", std::string("qgate ") + kVersion);
  bool list_presets = false;
  app.add_flag("--list-presets", list_presets, "list preset parameter sets");
  app.require_subcommand(0, 1);

  struct Args {
    std::string preset, config_file, out = ".";
    std::vector<std::string> sets;
    int workers = 1;
    unsigned seed = 12345;
    bool check = false, keys = false;
    double fmo_s = 0.0, fmo_temp = 0.0;
  } args;

  std::map<std::string, CLI::App*> subs;
  for (const auto& sc : scenarios()) {
    CLI::App* sub = app.add_subcommand(sc.name, sc.blurb);
    sub->add_option("--preset", args.preset, "preset parameter set");
    sub->add_option("--config", args.config_file,
                    "flat key=value file or a JSON sidecar");
    sub->add_option("--set", args.sets, "override key=value (repeatable)");
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--workers", args.workers, "worker pool size");
    sub->add_option("--seed", args.seed, "random seed (recorded in sidecar)");
    sub->add_flag("--keys", args.keys, "list configuration keys and exit");
    if (std::string(sc.name) == "audit")
      sub->add_flag("--check", args.check,
                    "evaluate the audit checks; exit 4 on failure");
    if (std::string(sc.name) == "fmo") {
      sub->add_option("--s", args.fmo_s, "single spectral exponent override");
      sub->add_option("--temp-k", args.fmo_temp,
                      "single temperature override (kelvin)");
    }
    subs[sc.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  if (list_presets) {
    print_presets();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::fprintf(stderr, "%s\n", app.help().c_str());
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const Scenario& sc = find_scenario(name);
    if (args.keys) {
      print_keys(sc);
      return 0;
    }

    Ctx ctx;
    ctx.scenario = name;
    ctx.cfg = defaults_for(sc);
    ctx.workers = std::max(1, args.workers);
    ctx.seed = args.seed;
    ctx.check = args.check;
    ctx.out = args.out;

    if (!args.preset.empty()) {
      const Preset& p = find_preset(args.preset);
      if (name != p.scenario)
        throw std::invalid_argument("preset '" + args.preset +
                                    "' belongs to scenario '" + p.scenario +
                                    "'");
      for (const auto& [key, val] : p.kv) ctx.cfg[key] = val;
    }
    if (!args.config_file.empty()) {
      const auto side_seed = load_config_file(args.config_file, name, &ctx.cfg);
      if (side_seed && subs[name]->count("--seed") == 0) ctx.seed = *side_seed;
    }
    for (const auto& kv : args.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got '" + kv +
                                    "'");
      ctx.cfg[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
    if (name == "fmo") {
      if (subs[name]->count("--s")) ctx.cfg["fmo.s_list"] = fmt_short(args.fmo_s);
      if (subs[name]->count("--temp-k"))
        ctx.cfg["fmo.temps_k"] = fmt_short(args.fmo_temp);
    }
    check_known(sc, ctx.cfg);

    fs::create_directories(ctx.out);
    const int rc = sc.run(ctx);
    write_sidecar(ctx);
    if (rc == 0) std::printf("ok\n");
    return rc;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "qgate: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qgate: %s\n", e.what());
    return 3;
  }
}
