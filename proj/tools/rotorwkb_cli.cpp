// rotorwkb command-line driver.
//
//   rotorwkb run-nls CONFIG [--out DIR] [--section.key=value ...]
//   rotorwkb run-wkb | run-hydro | run-rays CONFIG ...
//   rotorwkb sweep CONFIG --eps 0.25,0.125,0.0625 [--T 0.5] [--mode nls|wkb|both] [--out DIR]
//   rotorwkb compare A.rsfw B.rsfw [--s 4]
//   rotorwkb observables SNAPSHOT.rsfw [--config CONFIG] [--section.key=value ...]
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical abort.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "rotorwkb/harness.hpp"
#include "rotorwkb/observables.hpp"
#include "rotorwkb/snapshot.hpp"

namespace fs = std::filesystem;
using namespace rotorwkb;
using namespace rotorwkb::harness;

namespace {

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& extras) {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + arg + "'");
    std::string key = arg.substr(2), value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < extras.size()) {
      value = extras[++i];
    } else {
      throw ConfigError("override --" + key + " needs a value");
    }
    out[key] = value;
  }
  return out;
}

RunConfig configure(const std::string& path, const std::vector<std::string>& extras) {
  RunConfig cfg = load_config(path);
  apply_overrides(cfg, parse_overrides(extras));
  return cfg;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--eps: cannot parse '" + item + "'");
    }
  }
  return out;
}

void print_fit(const char* name, const SweepResult::Fit& f) {
  if (!f.valid && !f.floor_limited) return;
  std::printf("%s slope %.4f intercept %.4f%s\n", name, f.slope, f.intercept, f.floor_limited ? " (floor-limited)" : "");
}

void write_sweep_csv(const fs::path& path, const SweepResult& r) {
  std::ofstream out(path, std::ios::binary);
  out << "eps,density_l1,current_l2,amplitude_l2,wall_time\n";
  auto at = [](const std::vector<double>& v, std::size_t i) {
    return i < v.size() ? format_double(v[i]) : std::string();
  };
  for (std::size_t i = 0; i < r.eps.size(); ++i)
    out << format_double(r.eps[i]) << ',' << at(r.density_l1, i) << ',' << at(r.current_l2, i) << ','
        << at(r.amplitude_l2, i) << ',' << at(r.wall_time, i) << '\n';
}

int run_solver(Solver solver, const std::string& config, const std::string& out_opt,
               const std::vector<std::string>& extras) {
  RunConfig cfg = configure(config, extras);
  cfg.solver = solver;
  const fs::path base = fs::path(config).parent_path();
  const fs::path out = out_opt.empty() ? fs::path(cfg.output) : fs::path(out_opt);
  const RunResult r = run(cfg, out, base);
  if (r.exit_code != 0) {
    std::fprintf(stderr, "rotorwkb: %s\n", r.message.c_str());
    return r.exit_code;
  }
  std::printf("%s run finished in %.3f s, %zu artifacts in %s (boundary leak %.3e)\n", solver_name(solver).c_str(),
              r.wall_time, r.artifacts.size(), out.string().c_str(), r.boundary_leak);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotating semiclassical NLS, WKB and ray solvers"};
  app.require_subcommand(1);

  std::string config, out, eps_list, mode = "both", file_a, file_b;
  double sweep_T = -1.0, s_norm = 4.0;

  struct SolverCmd {
    const char* name;
    Solver solver;
    const char* help;
  };
  const SolverCmd solvers[] = {{"run-nls", Solver::nls, "Split-step spectral NLS"},
                               {"run-wkb", Solver::wkb, "Modified WKB system"},
                               {"run-hydro", Solver::hydro, "Rotating Euler (eps = 0) system"},
                               {"run-rays", Solver::rays, "Hamilton-Jacobi rays"}};
  std::vector<std::pair<CLI::App*, Solver>> run_cmds;
  for (const auto& s : solvers) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("config", config, "Configuration file")->required();
    sub->add_option("--out", out, "Output directory (default: [run].output)");
    sub->allow_extras();
    run_cmds.emplace_back(sub, s.solver);
  }

  auto* sweep = app.add_subcommand("sweep", "Epsilon sweep with log-log slope fit");
  sweep->add_option("config", config, "Configuration file")->required();
  sweep->add_option("--eps", eps_list, "Comma list, strictly decreasing")->required();
  sweep->add_option("--T", sweep_T, "Final time (default: [run].T)");
  sweep->add_option("--mode", mode, "nls, wkb or both")->check(CLI::IsMember({"nls", "wkb", "both"}));
  sweep->add_option("--out", out, "Directory for sweep.csv");
  sweep->allow_extras();

  auto* compare = app.add_subcommand("compare", "Difference norms between two snapshots");
  compare->add_option("a", file_a)->required();
  compare->add_option("b", file_b)->required();
  compare->add_option("--s", s_norm, "Sobolev index");

  auto* obs = app.add_subcommand("observables", "Observables of a psi snapshot");
  obs->add_option("snapshot", file_a)->required();
  obs->add_option("--config", config, "Configuration supplying trap and rotation");
  obs->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (const auto& [sub, solver] : run_cmds)
      if (sub->parsed()) return run_solver(solver, config, out, sub->remaining());

    if (sweep->parsed()) {
      RunConfig cfg = configure(config, sweep->remaining());
      const SweepMode m = mode == "nls" ? SweepMode::nls : mode == "wkb" ? SweepMode::wkb : SweepMode::both;
      const double T = sweep_T >= 0.0 ? sweep_T : cfg.T;
      const fs::path dir = out.empty() ? fs::path(cfg.output) : fs::path(out);
      SweepResult r;
      int code = 0;
      try {
        r = epsilon_sweep(cfg, parse_list(eps_list), T, m, fs::path(config).parent_path());
      } catch (const SweepAborted& e) {
        std::fprintf(stderr, "rotorwkb: %s\n", e.what());
        r = e.partial;
        code = 3;
      }
      fs::create_directories(dir);
      write_sweep_csv(dir / "sweep.csv", r);
      print_fit("density_l1", r.density_fit);
      print_fit("current_l2", r.current_fit);
      print_fit("amplitude_l2", r.amplitude_fit);
      return code;
    }

    if (compare->parsed()) {
      const FieldMetrics m = compare_files(file_a, file_b, s_norm);
      std::printf("l1 %.17g\nl2 %.17g\nlinf %.17g\nh%g %.17g\ngauge_l2 %.17g\n", m.l1, m.l2, m.linf, s_norm, m.hs,
                  m.gauge_l2);
      return 0;
    }

    if (obs->parsed()) {
      const Snapshot snap = read_snapshot(fs::path(file_a));
      SimParams params;
      if (!config.empty()) params = configure(config, obs->remaining()).sim;
      params.dim = snap.field.grid.dim;
      params.eps = snap.eps;
      WaveField w{snap.field, snap.t, params};
      write_observables_csv(std::cout, {observe(w)});
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "rotorwkb: %s\n", e.what());
    return 2;
  } catch (const GridMismatch& e) {
    std::fprintf(stderr, "rotorwkb: %s\n", e.what());
    return 2;
  } catch (const SnapshotFormatError& e) {
    std::fprintf(stderr, "rotorwkb: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "rotorwkb: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rotorwkb: %s\n", e.what());
    return 3;
  }
  return 0;
}
