#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "elsim/control.hpp"
#include "elsim/error.hpp"
#include "elsim/relative_energy.hpp"
#include "elsim/scheme.hpp"
#include "json.hpp"

namespace elsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config access with key-path errors and unknown-key detection.

class Config {
 public:
  explicit Config(json root) : root_(std::move(root)) {
    if (!root_.is_object()) throw ConfigError("", "object", "config root must be an object");
  }

  const json& root() const { return root_; }

  const json* find(const std::string& path) {
    used_.insert(path);
    const json* node = &root_;
    std::size_t pos = 0;
    while (pos <= path.size()) {
      const std::size_t dot = path.find('.', pos);
      const std::string part = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
      if (!node->is_object()) throw ConfigError(path, "object", "'" + path + "': parent is not an object");
      auto it = node->find(part);
      if (it == node->end()) return nullptr;
      node = &*it;
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }
    return node;
  }

  bool has(const std::string& path) { return find(path) != nullptr; }

  double number(const std::string& path, std::optional<double> def = {}) {
    const json* j = find(path);
    if (!j) return require(path, "number", def);
    if (!j->is_number()) throw type_error(path, "number", *j);
    return j->get<double>();
  }

  int integer(const std::string& path, std::optional<int> def = {}) {
    const json* j = find(path);
    if (!j) return require(path, "integer", def);
    if (!j->is_number_integer()) throw type_error(path, "integer", *j);
    return j->get<int>();
  }

  bool boolean(const std::string& path, std::optional<bool> def = {}) {
    const json* j = find(path);
    if (!j) return require(path, "boolean", def);
    if (!j->is_boolean()) throw type_error(path, "boolean", *j);
    return j->get<bool>();
  }

  std::string string(const std::string& path, std::optional<std::string> def = {}) {
    const json* j = find(path);
    if (!j) return require(path, "string", def);
    if (!j->is_string()) throw type_error(path, "string", *j);
    return j->get<std::string>();
  }

  std::vector<double> numbers(const std::string& path, std::size_t n,
                              std::optional<std::vector<double>> def = {}) {
    const std::string expected = "array of " + std::to_string(n) + " numbers";
    const json* j = find(path);
    if (!j) return require(path, expected, def);
    if (!j->is_array() || (n > 0 && j->size() != n)) throw type_error(path, expected, *j);
    std::vector<double> out;
    for (const json& x : *j) {
      if (!x.is_number()) throw type_error(path, expected, *j);
      out.push_back(x.get<double>());
    }
    return out;
  }

  Vec3 vec3(const std::string& path, std::optional<Vec3> def = {}) {
    std::optional<std::vector<double>> d;
    if (def) d = std::vector<double>{(*def)[0], (*def)[1], (*def)[2]};
    const auto v = numbers(path, 3, d);
    return Vec3{v[0], v[1], v[2]};
  }

  /// Either a scalar (repeated) or an array of three.
  std::array<double, 3> triple(const std::string& path, std::array<double, 3> def) {
    const json* j = find(path);
    if (!j) return def;
    if (j->is_number()) {
      const double x = j->get<double>();
      return {x, x, x};
    }
    const auto v = numbers(path, 3);
    return {v[0], v[1], v[2]};
  }

  /// Every leaf of the config must have been read.
  void check_unused() const { walk(root_, ""); }

 private:
  template <class T>
  T require(const std::string& path, const std::string& expected, const std::optional<T>& def) {
    if (def) return *def;
    throw ConfigError(path, expected, "missing required key '" + path + "' (expected " + expected + ")");
  }

  static ConfigError type_error(const std::string& path, const std::string& expected, const json& got) {
    return ConfigError(path, expected,
                       "key '" + path + "': expected " + expected + ", got " + got.type_name());
  }

  void walk(const json& node, const std::string& prefix) const {
    if (!prefix.empty() && used_.count(prefix)) return;
    if (!node.is_object() || node.empty()) {
      throw ConfigError(prefix, "known key", "unknown config key '" + prefix + "'");
    }
    for (auto it = node.begin(); it != node.end(); ++it)
      walk(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
  }

  json root_;
  std::set<std::string> used_;
};

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(assignment, "key=value", "override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;  // bare strings
  }
  json* node = &root;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (part.empty()) throw ConfigError(key, "key path", "override key '" + key + "' is malformed");
    if (!node->is_object()) {
      if (!node->is_null())
        throw ConfigError(key, "object", "override '" + key + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

// ---------------------------------------------------------------------------
// Run configuration.

struct InitialSpec {
  std::string preset = "random-perturbed";
  Vec3 director{0, 0, 1};
  Vec3 velocity{0, 0, 0};
  double amplitude = 0.3;
  double velocity_amplitude = 0.2;
  int wavenumber = 1;
  int modes = 2;
};

struct CertificateSpec {
  std::string test = "equilibrium";
  Vec3 director{0, 0, 1};
  CertificateOptions options;
  std::string trace_dir;
};

struct ControlSpec {
  ControlProblem problem;
  Vec3 target_H{0, 0, 0};
  std::string target_snapshot;
};

struct RunConfig {
  Grid grid;
  MaterialParams params;
  SchemeConfig scheme;
  InitialSpec initial;
  CertificateSpec certificate;
  ControlSpec control;
  TimeQuadrature quadrature = TimeQuadrature::stage;
  std::string out_dir = "out";
  int checkpoint_every = 1;
  std::uint64_t seed = 1;
};

template <class F>
auto in_section(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, "valid value", "'" + key + "': " + e.what());
  }
}

RunConfig parse_config(Config& c) {
  RunConfig rc;
  const double two_pi = 2.0 * std::numbers::pi;

  const int dims = c.integer("grid.dims", 2);
  if (dims != 2 && dims != 3) throw ConfigError("grid.dims", "2 or 3", "'grid.dims' must be 2 or 3");
  std::array<double, 3> n = c.triple("grid.n", {32, 32, dims == 3 ? 32.0 : 1.0});
  std::array<double, 3> L = c.triple("grid.extent", {two_pi, two_pi, dims == 3 ? two_pi : 1.0});
  if (dims == 2) {
    n[2] = 1;
    L[2] = 1.0;
  }
  std::array<int, 3> ni{};
  for (int a = 0; a < 3; ++a) {
    if (n[a] != std::floor(n[a]) || n[a] < 1)
      throw ConfigError("grid.n", "positive integers", "'grid.n' must hold positive integers");
    ni[a] = static_cast<int>(n[a]);
  }
  const std::string mode = c.string("grid.boundary", "periodic");
  rc.grid = in_section("grid", [&] {
    return make_grid(dims, ni, L, boundary_mode_from_string(mode));
  });

  const auto K = c.numbers("material.K", 3, std::vector<double>{1.0, 0.8, 1.2});
  const auto mu = c.numbers("material.mu", 6, std::vector<double>{0.5, -0.6, -0.1, 1.0, 0.8, 0.4});
  const auto chi = c.numbers("material.chi", 2, std::vector<double>{-0.1, -0.2});
  const double gshift = c.number("material.gamma", 0.0);
  rc.params = in_section("material", [&] {
    return build_params({K[0], K[1], K[2]}, {mu[0], mu[1], mu[2], mu[3], mu[4], mu[5]},
                        {chi[0], chi[1]}, gshift);
  });

  SchemeConfig& s = rc.scheme;
  s.dt = c.number("scheme.dt", 1e-3);
  s.t_end = c.number("scheme.t_end", 0.1);
  const std::string integ = c.string("scheme.integrator", "rk4");
  if (integ == "rk4") s.integrator = Integrator::rk4;
  else if (integ == "euler") s.integrator = Integrator::euler;
  else throw ConfigError("scheme.integrator", "\"rk4\" or \"euler\"", "'scheme.integrator' must be rk4 or euler");
  s.record_every = c.integer("scheme.record_every", 1);
  s.blowup_threshold = c.number("scheme.blowup_threshold", 1e8);
  s.H = VectorField(rc.grid, c.vec3("scheme.H", Vec3{0, 0, 0}));
  const Vec3 g = c.vec3("scheme.forcing", Vec3{0, 0, 0});
  if (g[0] != 0.0 || g[1] != 0.0 || g[2] != 0.0) s.forcing.sampled = VectorField(rc.grid, g);
  if (c.has("scheme.cutoff")) {
    const auto k = c.triple("scheme.cutoff", {0, 0, 0});
    SpectralCutoff cut;
    for (int a = 0; a < 3; ++a) cut.kmax[a] = static_cast<int>(k[a]);
    in_section("scheme.cutoff", [&] {
      validate_cutoff(rc.grid, cut);
      return 0;
    });
    s.cutoff = cut;
  }
  in_section("scheme", [&] {
    validate(s);
    return 0;
  });

  InitialSpec& in = rc.initial;
  in.preset = c.string("initial.preset", in.preset);
  if (in.preset != "constant" && in.preset != "twist" && in.preset != "random-perturbed")
    throw ConfigError("initial.preset", "constant | twist | random-perturbed",
                      "'initial.preset' must be constant, twist or random-perturbed");
  in.director = c.vec3("initial.director", in.director);
  in.velocity = c.vec3("initial.velocity", in.velocity);
  in.amplitude = c.number("initial.amplitude", in.amplitude);
  in.velocity_amplitude = c.number("initial.velocity_amplitude", in.velocity_amplitude);
  in.wavenumber = c.integer("initial.wavenumber", in.wavenumber);
  in.modes = c.integer("initial.modes", in.modes);
  if (norm(in.director) == 0.0)
    throw ConfigError("initial.director", "nonzero vector", "'initial.director' must be nonzero");
  rc.seed = static_cast<std::uint64_t>(c.integer("seed", 1));

  CertificateSpec& cs = rc.certificate;
  cs.test = c.string("certificate.test", cs.test);
  if (cs.test != "equilibrium" && cs.test != "self")
    throw ConfigError("certificate.test", "equilibrium | self", "'certificate.test' must be equilibrium or self");
  cs.director = c.vec3("certificate.director", cs.director);
  if (c.has("certificate.C")) cs.options.C = c.number("certificate.C");
  cs.options.tol = c.number("certificate.tol", cs.options.tol);
  cs.options.C_max = c.number("certificate.C_max", cs.options.C_max);
  const std::string form = c.string("certificate.form", "continuous");
  if (form == "continuous") cs.options.form = PairingForm::continuous;
  else if (form == "discrete") cs.options.form = PairingForm::discrete;
  else throw ConfigError("certificate.form", "continuous | discrete", "'certificate.form' must be continuous or discrete");
  cs.options.discrete_terms = c.boolean("certificate.discrete_terms", false);
  cs.trace_dir = c.string("certificate.trace_dir", "");

  ControlSpec& ct = rc.control;
  ControlProblem& p = ct.problem;
  p.gamma = c.number("control.gamma", p.gamma);
  p.c_H = c.number("control.c_H", p.c_H);
  p.basis = in_section("control.basis", [&] {
    return control_basis_from_string(c.string("control.basis", "uniform"));
  });
  p.kmax = c.integer("control.kmax", p.kmax);
  p.fd_step = c.number("control.fd_step", p.fd_step);
  p.grad_tol = c.number("control.grad_tol", p.grad_tol);
  p.stagnation_tol = c.number("control.stagnation_tol", p.stagnation_tol);
  p.max_iterations = c.integer("control.max_iterations", p.max_iterations);
  p.max_state_solves = c.integer("control.max_state_solves", p.max_state_solves);
  p.probe_step = c.number("control.probe_step", p.probe_step);
  p.initial_params = c.numbers("control.initial_params", 0, std::vector<double>{});
  ct.target_H = c.vec3("control.target.H", ct.target_H);
  ct.target_snapshot = c.string("control.target.snapshot", "");

  const std::string quad = c.string("energy_report.quadrature", "stage");
  if (quad == "stage") rc.quadrature = TimeQuadrature::stage;
  else if (quad == "trapezoid") rc.quadrature = TimeQuadrature::trapezoid;
  else throw ConfigError("energy_report.quadrature", "stage | trapezoid", "'energy_report.quadrature' must be stage or trapezoid");

  rc.out_dir = c.string("output.dir", rc.out_dir);
  rc.checkpoint_every = c.integer("output.checkpoint_every", rc.checkpoint_every);
  if (rc.checkpoint_every < 0)
    throw ConfigError("output.checkpoint_every", "integer >= 0", "'output.checkpoint_every' must be >= 0");

  c.check_unused();
  return rc;
}

// ---------------------------------------------------------------------------
// Initial data presets.

VectorField random_smooth(const Grid& g, std::mt19937_64& rng, int kmax) {
  std::normal_distribution<double> nd;
  const int kz = g.dims == 3 ? kmax : 0;
  VectorField f(g);
  for (int c = 0; c < 3; ++c)
    for (int mx = -kmax; mx <= kmax; ++mx)
      for (int my = -kmax; my <= kmax; ++my)
        for (int mz = -kz; mz <= kz; ++mz) {
          const double w = 1.0 / (1.0 + mx * mx + my * my + mz * mz);
          const double a = w * nd(rng), b = w * nd(rng);
          for (std::size_t i = 0; i < g.size(); ++i) {
            const Vec3 x = g.position(i);
            const double ph = 2.0 * std::numbers::pi *
                              (mx * x[0] / g.extent[0] + my * x[1] / g.extent[1] +
                               mz * x[2] / g.extent[2]);
            f.comp[c][i] += a * std::cos(ph) + b * std::sin(ph);
          }
        }
  return f;
}

VectorField normalize_nodes(VectorField f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    Vec3 x = f.at(i);
    const double n = norm(x);
    if (n == 0.0) throw Error("director preset produced a zero vector");
    f.set(i, (1.0 / n) * x);
  }
  return f;
}

FieldState initial_state(const RunConfig& rc) {
  const Grid& g = rc.grid;
  const InitialSpec& in = rc.initial;
  VectorField v, d;
  if (in.preset == "constant") {
    v = VectorField(g, in.velocity);
    d = VectorField(g, (1.0 / norm(in.director)) * in.director);
  } else if (in.preset == "twist") {
    // director rotating in the (y, z) plane along x
    const double k = 2.0 * std::numbers::pi * in.wavenumber / g.extent[0];
    d = sample(g, [k](const Vec3& x) { return Vec3{0.0, std::cos(k * x[0]), std::sin(k * x[0])}; });
    v = VectorField(g, in.velocity);
  } else {
    std::mt19937_64 rng(rc.seed);
    VectorField pert = random_smooth(g, rng, in.modes);
    pert *= in.amplitude;
    d = normalize_nodes(VectorField(g, (1.0 / norm(in.director)) * in.director) + pert);
    v = random_smooth(g, rng, in.modes);
    v *= in.velocity_amplitude;
  }
  return prepare_initial_state(v, d, rc.params, rc.scheme.cutoff);
}

// ---------------------------------------------------------------------------
// Output.

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw Error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << fmt(values[i]);
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

double json_number(double x) { return std::isfinite(x) ? x : 0.0; }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// diagnostics.csv: the energy balance along a run
void write_diagnostics(const fs::path& path, const EnergyReport& rep) {
  Csv csv(path, {"t", "kinetic", "elastic", "magnetic", "diss_mu1", "diss_mu4", "diss_mu56",
                 "diss_dxq", "energy_residual", "max_norm_deviation"});
  for (const auto& r : rep.rows)
    csv.row({r.t, r.kinetic, r.elastic, r.magnetic, r.diss_mu1, r.diss_mu4, r.diss_mu56,
             r.diss_dxq, r.energy_residual, r.max_norm_deviation});
}

void write_checkpoints(const fs::path& dir, const SimulationTrace& trace, int every) {
  if (every == 0) return;
  fs::create_directories(dir);
  Csv index(dir / "index.csv", {"sample", "t"});
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    if (i % every != 0 && i + 1 != trace.states.size()) continue;
    char name[32];
    std::snprintf(name, sizeof name, "state_%06zu.snap", i);
    write_snapshot((dir / name).string(), {trace.states[i].v, trace.states[i].d});
    index.row({static_cast<double>(i), trace.states[i].t});
  }
}

SimulationTrace read_checkpoints(const fs::path& dir) {
  std::ifstream is(dir / "index.csv");
  if (!is) throw Error("cannot read " + (dir / "index.csv").string());
  std::string line;
  std::getline(is, line);
  SimulationTrace trace;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const long sample = std::stol(line.substr(0, comma));
    const double t = std::stod(line.substr(comma + 1));
    char name[32];
    std::snprintf(name, sizeof name, "state_%06ld.snap", sample);
    auto fields = read_snapshot((dir / name).string());
    if (fields.size() != 2) throw Error(std::string("checkpoint ") + name + " must hold v and d");
    trace.states.push_back({std::move(fields[0]), std::move(fields[1]), t});
  }
  if (trace.states.empty()) throw Error("no checkpoints in " + dir.string());
  return trace;
}

json summary_json(const EnergyReport& rep) {
  return {{"eta", rep.eta},
          {"boundary_constant", rep.boundary_constant},
          {"max_abs_residual", rep.max_abs_residual},
          {"sup_velocity_l2", rep.sup_velocity_l2},
          {"sup_director_h1", rep.sup_director_h1},
          {"coercivity_violations", rep.coercivity_violations},
          {"samples", rep.rows.size()}};
}

// ---------------------------------------------------------------------------
// Subcommands.

json cmd_simulate(const RunConfig& rc, const fs::path& out) {
  const SimulationTrace trace = integrate(initial_state(rc), rc.params, rc.scheme);
  const EnergyReport rep = energy_report(trace, rc.params, rc.scheme, rc.quadrature);
  write_diagnostics(out / "diagnostics.csv", rep);
  write_checkpoints(out / "checkpoints", trace, rc.checkpoint_every);
  json s = summary_json(rep);
  s["steps"] = trace.diagnostics.empty() ? 0 : trace.diagnostics.back().step;
  s["t_end"] = trace.states.back().t;
  return s;
}

json cmd_energy_report(const RunConfig& rc, const fs::path& out) {
  const SimulationTrace trace = integrate(initial_state(rc), rc.params, rc.scheme);
  const EnergyReport rep = energy_report(trace, rc.params, rc.scheme, rc.quadrature);
  Csv csv(out / "energy_report.csv",
          {"t", "kinetic", "elastic", "magnetic", "diss_mu1", "diss_mu4", "diss_mu56", "diss_dxq",
           "work", "energy_residual", "max_norm_deviation", "free_energy", "coercivity_bound",
           "coercivity_ok"});
  for (const auto& r : rep.rows)
    csv.row({r.t, r.kinetic, r.elastic, r.magnetic, r.diss_mu1, r.diss_mu4, r.diss_mu56,
             r.diss_dxq, r.work, r.energy_residual, r.max_norm_deviation, r.free_energy,
             r.coercivity_bound, r.coercivity_ok ? 1.0 : 0.0});
  json s = summary_json(rep);
  write_json(out / "energy_report.json", s);
  return s;
}

json cmd_certify(const RunConfig& rc, const fs::path& out) {
  SimulationTrace trace = rc.certificate.trace_dir.empty()
                              ? integrate(initial_state(rc), rc.params, rc.scheme)
                              : read_checkpoints(rc.certificate.trace_dir);
  require_same_grid(rc.grid, trace.states.front().v.grid);
  std::unique_ptr<TestTrajectory> test;
  if (rc.certificate.test == "equilibrium")
    test = equilibrium_trajectory(rc.grid, (1.0 / norm(rc.certificate.director)) * rc.certificate.director);
  else
    test = std::make_unique<TraceTrajectory>(trace, rc.params, rc.scheme);
  const CertificateReport rep = certificate(trace, rc.scheme, *test, rc.params, rc.certificate.options);

  Csv csv(out / "certificate.csv",
          {"t", "lhs", "rhs", "slack", "rel_energy", "rel_dissipation", "weight", "pairing"});
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    csv.row({rep.times[i], rep.lhs[i], rep.rhs[i], rep.slack[i], rep.rel_energy[i],
             rep.rel_dissipation[i], rep.weight[i], rep.pairing[i]});
  double min_slack = std::numeric_limits<double>::infinity();
  for (double s : rep.slack) min_slack = std::min(min_slack, s);
  json s = {{"pass", rep.pass},
            {"C", finite_or_null(rep.C)},
            {"C_admissible", std::isfinite(rep.C)},
            {"min_slack", finite_or_null(min_slack)},
            {"initial_distance", rep.initial_distance},
            {"field_mismatch", rep.field_mismatch},
            {"form", to_string(rep.form)},
            {"discrete_terms", rep.discrete_terms},
            {"test", rc.certificate.test},
            {"samples", rep.times.size()},
            {"warnings", rep.warnings}};
  write_json(out / "certificate.json", s);
  return s;
}

json cmd_optimize(const RunConfig& rc, const fs::path& out) {
  ControlProblem p = rc.control.problem;
  p.grid = rc.grid;
  p.params = rc.params;
  p.scheme = rc.scheme;
  p.initial = initial_state(rc);
  if (!rc.control.target_snapshot.empty()) {
    auto fields = read_snapshot(rc.control.target_snapshot);
    if (fields.size() != 2) throw Error("target snapshot must hold v and d");
    p.v_target = std::move(fields[0]);
    p.d_target = std::move(fields[1]);
  } else {
    // manufactured targets: the state reached under the uniform field target.H
    SchemeConfig cfg = rc.scheme;
    cfg.H = VectorField(rc.grid, rc.control.target_H);
    const SimulationTrace tr = integrate(p.initial, rc.params, cfg);
    p.v_target = tr.states.back().v;
    p.d_target = tr.states.back().d;
  }
  const ControlResult r = optimize(p);

  Csv csv(out / "optimization_log.csv", {"iteration", "J", "grad_norm", "step", "H_L2", "H_L3"});
  for (const auto& row : r.log)
    csv.row({static_cast<double>(row.iteration), row.J, row.grad_norm, row.step, row.H_L2, row.H_L3});
  write_snapshot((out / "H_opt.snap").string(), {r.H_opt});
  const FieldState& fin = r.final_trace.states.back();
  write_snapshot((out / "final_state.snap").string(), {fin.v, fin.d});

  json s = {{"J", r.J_history.back()},
            {"J_initial", r.J_history.front()},
            {"iterations", r.log.back().iteration},
            {"evaluations", r.evaluations},
            {"stop_reason", r.stop_reason},
            {"params", r.params},
            {"H_opt_L3", discrete_norm(r.H_opt, NormKind::L3)},
            {"c_H", p.c_H}};
  write_json(out / "control.json", s);
  return s;
}

json error_record(const std::string& kind, const std::string& message) {
  return {{"status", "error"}, {"kind", kind}, {"message", message}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ericksen-Leslie nematic flow simulator", "elsim"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::vector<CLI::App*> subs;
  for (const char* name : {"simulate", "certify", "optimize", "energy-report"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--override", overrides, "key.path=value, value parsed as JSON")->take_all();
    subs.push_back(sub);
  }
  app.get_subcommand("simulate")->description("integrate the scheme; writes diagnostics.csv and checkpoints");
  app.get_subcommand("certify")->description("evaluate the relative energy certificate");
  app.get_subcommand("optimize")->description("optimize a static magnetic field toward targets");
  app.get_subcommand("energy-report")->description("energy balance and coercivity diagnostics");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_record("usage", e.what()).dump() << '\n';
    return 2;
  }
  std::string subcommand;
  for (CLI::App* s : subs)
    if (s->parsed()) subcommand = s->get_name();

  const std::string started = timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  json resolved;
  fs::path outp = out_dir.empty() ? fs::path("out") : fs::path(out_dir);

  auto finish = [&](const json& record, int status) {
    try {
      fs::create_directories(outp);
      json meta = {{"subcommand", subcommand},
                   {"started", started},
                   {"finished", timestamp()},
                   {"elapsed_seconds",
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                   {"exit_status", status},
                   {"config", resolved}};
      write_json(outp / "metadata.json", meta);
      if (status != 0) write_json(outp / "error.json", record);
    } catch (const std::exception&) {
      // the record still goes to stderr
    }
    if (status != 0) err << record.dump() << '\n';
    else out << record.dump() << '\n';
    return status;
  };

  try {
    json root = json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      try {
        root = json::parse(is, nullptr, true, true);
      } catch (const json::parse_error& e) {
        throw ConfigError("", "JSON document", std::string("config is not valid JSON: ") + e.what());
      }
    }
    for (const auto& o : overrides) apply_override(root, o);
    if (!out_dir.empty()) apply_override(root, "output.dir=" + json(out_dir).dump());
    resolved = root;
    Config cfg(root);
    const RunConfig rc = parse_config(cfg);
    outp = rc.out_dir;
    fs::create_directories(outp);

    json summary;
    if (subcommand == "simulate") summary = cmd_simulate(rc, outp);
    else if (subcommand == "energy-report") summary = cmd_energy_report(rc, outp);
    else if (subcommand == "certify") summary = cmd_certify(rc, outp);
    else summary = cmd_optimize(rc, outp);
    return finish({{"status", "ok"}, {"subcommand", subcommand}, {"summary", summary}}, 0);
  } catch (const ConfigError& e) {
    json rec = error_record("config", e.what());
    rec["key"] = e.key();
    rec["expected"] = e.expected();
    return finish(rec, 2);
  } catch (const BlowUpError& e) {
    json rec = error_record("blowup", e.what());
    rec["step"] = e.step();
    rec["time"] = json_number(e.time());
    return finish(rec, 3);
  } catch (const SolverError& e) {
    json rec = error_record("solver", e.what());
    rec["iterations"] = e.iterations();
    rec["residual"] = json_number(e.residual());
    return finish(rec, 3);
  } catch (const ParameterError& e) {
    return finish(error_record("parameter", e.what()), 3);
  } catch (const GridMismatch& e) {
    return finish(error_record("grid_mismatch", e.what()), 3);
  } catch (const Error& e) {
    return finish(error_record("error", e.what()), 3);
  } catch (const std::exception& e) {
    return finish(error_record("internal", e.what()), 4);
  }
}

}  // namespace elsim::cli
