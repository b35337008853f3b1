#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rotorwkb/harness.hpp"
#include "rotorwkb/nls_spectral.hpp"
#include "rotorwkb/snapshot.hpp"

namespace rotorwkb::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  const auto dot = key.find('.');
  throw ConfigError("[" + key.substr(0, dot) + "]." + key.substr(dot + 1) + ": " + what);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) fail(key, "expected a number, got '" + v + "'");
  return x;
}

long to_int(const std::string& key, const std::string& v) {
  long x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(to_double(key, trim(item)));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "sim.eps",        "sim.Omega",     "sim.omega",        "sim.dim",         "sim.nonlinearity", "sim.coupling",
      "grid.N",         "grid.L",        "run.solver",       "run.T",           "run.dt",           "run.stride",
      "run.snapshot_every", "run.initial", "run.width",      "run.winding",     "run.center",       "run.initial_file",
      "run.phase",      "run.sigma0",    "run.b0",           "run.c0",          "run.phase_file",   "run.limit",
      "run.ray_count",  "run.ray_extent", "run.output"};
  return keys;
}

// Raw key/value pairs, already checked against the key set.
using Entries = std::map<std::string, std::string>;

RunConfig build(const Entries& e) {
  for (const char* req : {"sim.eps", "grid.N", "grid.L", "run.solver", "run.T"})
    if (!e.count(req)) fail(req, "missing required key");
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = e.find(k);
    return it == e.end() ? nullptr : &it->second;
  };

  RunConfig c;
  if (auto v = get("sim.dim")) c.sim.dim = static_cast<int>(to_int("sim.dim", *v));
  if (c.sim.dim != 2 && c.sim.dim != 3) fail("sim.dim", "must be 2 or 3");
  const int d = c.sim.dim;
  c.sim.eps = to_double("sim.eps", *get("sim.eps"));
  if (!(c.sim.eps > 0.0)) fail("sim.eps", "must be positive");
  if (auto v = get("sim.Omega")) c.sim.Omega = to_double("sim.Omega", *v);
  if (!(c.sim.Omega >= 0.0)) fail("sim.Omega", "must be nonnegative");
  if (auto v = get("sim.omega")) {
    const auto w = to_list("sim.omega", *v);
    if (static_cast<int>(w.size()) != d) fail("sim.omega", "needs " + std::to_string(d) + " components");
    for (int j = 0; j < d; ++j) {
      if (!(w[j] >= 0.0)) fail("sim.omega", "components must be nonnegative");
      c.sim.omega[j] = w[j];
    }
  }
  double coupling = 1.0;
  if (auto v = get("sim.coupling")) coupling = to_double("sim.coupling", *v);
  std::string nl = "cubic";
  if (auto v = get("sim.nonlinearity")) nl = *v;
  if (nl == "cubic") {
    if (!(coupling > 0.0)) fail("sim.coupling", "must be positive (f' > 0)");
    c.sim.nonlinearity = Nonlinearity::cubic(coupling);
  } else if (nl == "none") {
    c.sim.nonlinearity = Nonlinearity::none();
  } else {
    fail("sim.nonlinearity", "expected cubic or none, got '" + nl + "'");
  }

  const long N = to_int("grid.N", *get("grid.N"));
  if (N < 8 || (N & (N - 1)) != 0) fail("grid.N", "must be a power of two >= 8");
  const double L = to_double("grid.L", *get("grid.L"));
  if (!(L > 0.0)) fail("grid.L", "must be positive");
  c.grid = GridSpec::cube(d, static_cast<int>(N), L);

  const std::string& solver = *get("run.solver");
  if (solver == "nls") c.solver = Solver::nls;
  else if (solver == "wkb") c.solver = Solver::wkb;
  else if (solver == "hydro") c.solver = Solver::hydro;
  else if (solver == "rays") c.solver = Solver::rays;
  else fail("run.solver", "expected nls, wkb, hydro or rays, got '" + solver + "'");

  c.T = to_double("run.T", *get("run.T"));
  if (!(c.T >= 0.0)) fail("run.T", "must be nonnegative");
  c.dt = nls::default_dt(c.sim);
  if (auto v = get("run.dt")) c.dt = to_double("run.dt", *v);
  if (!(c.dt > 0.0)) fail("run.dt", "must be positive");
  if (auto v = get("run.stride")) {
    const long s = to_int("run.stride", *v);
    if (s < 1) fail("run.stride", "must be at least 1");
    c.stride = static_cast<std::size_t>(s);
  }
  if (auto v = get("run.snapshot_every")) {
    const long s = to_int("run.snapshot_every", *v);
    if (s < 0) fail("run.snapshot_every", "must be nonnegative");
    c.snapshot_every = static_cast<std::size_t>(s);
  }

  std::string init = "gaussian";
  if (auto v = get("run.initial")) init = *v;
  if (init == "gaussian") c.initial.kind = InitialData::Kind::gaussian;
  else if (init == "vortex") c.initial.kind = InitialData::Kind::vortex;
  else if (init == "file") c.initial.kind = InitialData::Kind::file;
  else fail("run.initial", "expected gaussian, vortex or file, got '" + init + "'");
  if (auto v = get("run.width")) c.initial.width = to_double("run.width", *v);
  if (!(c.initial.width > 0.0)) fail("run.width", "must be positive");
  if (auto v = get("run.winding")) c.initial.winding = static_cast<int>(to_int("run.winding", *v));
  if (auto v = get("run.center")) {
    const auto cc = to_list("run.center", *v);
    if (static_cast<int>(cc.size()) != d) fail("run.center", "needs " + std::to_string(d) + " components");
    for (int j = 0; j < d; ++j) c.initial.center[j] = cc[j];
  }
  if (auto v = get("run.initial_file")) c.initial.path = *v;
  if (c.initial.kind == InitialData::Kind::vortex && d != 2) fail("run.initial", "vortex data needs dim = 2");
  if (c.initial.kind == InitialData::Kind::file && c.initial.path.empty())
    fail("run.initial_file", "required when initial = file");

  std::string phase = "zero";
  if (auto v = get("run.phase")) phase = *v;
  if (phase == "zero") c.phase.kind = PhaseData::Kind::zero;
  else if (phase == "quadratic") c.phase.kind = PhaseData::Kind::quadratic;
  else if (phase == "file") c.phase.kind = PhaseData::Kind::file;
  else fail("run.phase", "expected zero, quadratic or file, got '" + phase + "'");
  if (auto v = get("run.sigma0")) c.phase.sigma0 = to_list("run.sigma0", *v);
  if (auto v = get("run.b0")) c.phase.b0 = to_list("run.b0", *v);
  if (auto v = get("run.c0")) c.phase.c0 = to_double("run.c0", *v);
  if (auto v = get("run.phase_file")) c.phase.path = *v;
  if (c.phase.kind == PhaseData::Kind::quadratic) {
    if (c.phase.sigma0.empty()) c.phase.sigma0.assign(d * d, 0.0);
    if (c.phase.b0.empty()) c.phase.b0.assign(d, 0.0);
    if (static_cast<int>(c.phase.sigma0.size()) != d * d) fail("run.sigma0", "needs dim*dim entries");
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < i; ++j)
        if (c.phase.sigma0[i * d + j] != c.phase.sigma0[j * d + i]) fail("run.sigma0", "must be symmetric");
    if (static_cast<int>(c.phase.b0.size()) != d) fail("run.b0", "needs dim entries");
  }
  if (c.phase.kind == PhaseData::Kind::file && c.phase.path.empty()) fail("run.phase_file", "required when phase = file");

  if (auto v = get("run.limit")) c.limit = to_bool("run.limit", *v);
  if (auto v = get("run.ray_count")) c.ray_count = static_cast<int>(to_int("run.ray_count", *v));
  if (c.ray_count < 1) fail("run.ray_count", "must be at least 1");
  if (auto v = get("run.ray_extent")) c.ray_extent = to_double("run.ray_extent", *v);
  if (!(c.ray_extent >= 0.0)) fail("run.ray_extent", "must be nonnegative");
  if (auto v = get("run.output")) c.output = *v;
  if (c.solver == Solver::rays && c.phase.kind == PhaseData::Kind::file)
    fail("run.phase", "the rays solver needs a zero or quadratic phase");
  return c;
}

Entries read_entries(const std::string& text) {
  Entries e;
  std::string section;
  std::istringstream in(text);
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "sim" && section != "grid" && section != "run")
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
    const std::string key = section + "." + trim(std::string_view(line).substr(0, eq));
    if (!known_keys().count(key)) fail(key, "unknown key");
    if (e.count(key)) fail(key, "duplicate key");
    e[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return e;
}

Entries to_entries(const RunConfig& c) {
  const int d = c.sim.dim;
  Entries e;
  e["sim.eps"] = format_double(c.sim.eps);
  e["sim.Omega"] = format_double(c.sim.Omega);
  e["sim.omega"] = join(std::vector<double>(c.sim.omega.begin(), c.sim.omega.begin() + d));
  e["sim.dim"] = std::to_string(d);
  e["sim.nonlinearity"] = c.sim.nonlinearity.name();
  if (c.sim.nonlinearity.kind() == Nonlinearity::Kind::cubic) e["sim.coupling"] = format_double(c.sim.nonlinearity.coupling());
  e["grid.N"] = std::to_string(c.grid.points[0]);
  e["grid.L"] = format_double(c.grid.half_extent[0]);
  e["run.solver"] = solver_name(c.solver);
  e["run.T"] = format_double(c.T);
  e["run.dt"] = format_double(c.dt);
  e["run.stride"] = std::to_string(c.stride);
  e["run.snapshot_every"] = std::to_string(c.snapshot_every);
  const char* init[] = {"gaussian", "vortex", "file"};
  e["run.initial"] = init[static_cast<int>(c.initial.kind)];
  e["run.width"] = format_double(c.initial.width);
  e["run.winding"] = std::to_string(c.initial.winding);
  e["run.center"] = join(std::vector<double>(c.initial.center.begin(), c.initial.center.begin() + d));
  if (!c.initial.path.empty()) e["run.initial_file"] = c.initial.path;
  const char* phase[] = {"zero", "quadratic", "file"};
  e["run.phase"] = phase[static_cast<int>(c.phase.kind)];
  if (!c.phase.sigma0.empty()) e["run.sigma0"] = join(c.phase.sigma0);
  if (!c.phase.b0.empty()) e["run.b0"] = join(c.phase.b0);
  e["run.c0"] = format_double(c.phase.c0);
  if (!c.phase.path.empty()) e["run.phase_file"] = c.phase.path;
  e["run.limit"] = c.limit ? "true" : "false";
  e["run.ray_count"] = std::to_string(c.ray_count);
  e["run.ray_extent"] = format_double(c.ray_extent);
  e["run.output"] = c.output;
  return e;
}

}  // namespace

std::string solver_name(Solver s) {
  switch (s) {
    case Solver::nls: return "nls";
    case Solver::wkb: return "wkb";
    case Solver::hydro: return "hydro";
    case Solver::rays: return "rays";
  }
  return "?";
}

RunConfig parse_config(const std::string& text) { return build(read_entries(text)); }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  const auto e = to_entries(cfg);
  std::string out;
  for (const char* section : {"sim", "grid", "run"}) {
    out += std::string(out.empty() ? "" : "\n") + "[" + section + "]\n";
    const std::string prefix = std::string(section) + ".";
    for (const auto& [k, v] : e)
      if (k.rfind(prefix, 0) == 0) out += k.substr(prefix.size()) + " = " + v + "\n";
  }
  return out;
}

void apply_overrides(RunConfig& cfg, const std::map<std::string, std::string>& overrides) {
  auto e = to_entries(cfg);
  for (const auto& [k, v] : overrides) {
    if (!known_keys().count(k)) {
      if (k.find('.') == std::string::npos) throw ConfigError("override '" + k + "' must look like section.key");
      fail(k, "unknown key");
    }
    e[k] = v;
  }
  // A changed trap or eps moves the default step only when dt was not given.
  if (!overrides.count("run.dt") && (overrides.count("sim.omega") || overrides.count("sim.dim"))) {
    const RunConfig probe = build(e);
    if (cfg.dt == nls::default_dt(cfg.sim)) e["run.dt"] = format_double(nls::default_dt(probe.sim));
  }
  cfg = build(e);
}

}  // namespace rotorwkb::harness
