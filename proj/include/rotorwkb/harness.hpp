#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotorwkb/hj_rays.hpp"
#include "rotorwkb/wavefield.hpp"

namespace rotorwkb::harness {

/// Parse or validation failure; the message names [section].key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Solver { nls, wkb, hydro, rays };

struct InitialData {
  enum class Kind { gaussian, vortex, file } kind = Kind::gaussian;
  double width = 0.70710678118654752;  ///< a_in ~ exp(-|x - c|^2 / (2 width^2))
  int winding = 1;
  Point center{0.0, 0.0, 0.0};
  std::string path;

  bool operator==(const InitialData&) const = default;
};

struct PhaseData {
  enum class Kind { zero, quadratic, file } kind = Kind::zero;
  std::vector<double> sigma0;  ///< d*d, row-major
  std::vector<double> b0;
  double c0 = 0.0;
  std::string path;

  bool operator==(const PhaseData&) const = default;
};

/// Sectioned key = value configuration:
///
///   [sim]  eps, Omega, omega (comma list), dim, nonlinearity (cubic | none), coupling
///   [grid] N, L
///   [run]  solver (nls | wkb | hydro | rays), T, dt, stride, snapshot_every,
///          initial (gaussian | vortex | file), width, winding, center, initial_file,
///          phase (zero | quadratic | file), sigma0, b0, c0, phase_file,
///          limit (wkb at eps = 0), ray_count, ray_extent, output
///
/// Defaults: dt = 1e-3 max(1, 1/max omega), stride = 10, snapshot_every = 0
/// (initial and final snapshots only), output = "out".
struct RunConfig {
  SimParams sim;
  GridSpec grid = GridSpec::cube(2, 256, 8.0);
  Solver solver = Solver::nls;
  double T = 1.0;
  double dt = 1e-3;
  std::size_t stride = 10;
  std::size_t snapshot_every = 0;
  InitialData initial;
  PhaseData phase;
  bool limit = false;
  int ray_count = 5;
  double ray_extent = 2.0;
  std::string output = "out";

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& cfg);

/// Applies "section.key" -> value overrides, then revalidates.
void apply_overrides(RunConfig& cfg, const std::map<std::string, std::string>& overrides);

std::string solver_name(Solver s);

/// a_in on the grid (relative paths resolved against base_dir).
ComplexField initial_amplitude(const RunConfig& cfg, const std::filesystem::path& base_dir = {});
/// Phi_in on the grid.
ScalarField initial_phase(const RunConfig& cfg, const std::filesystem::path& base_dir = {});
/// The quadratic part of Phi_in used as HJ data (zero for file phases).
rays::QuadraticPhase initial_quadratic_phase(const RunConfig& cfg);

struct RunResult {
  int exit_code = 0;
  std::string message;
  std::vector<std::filesystem::path> artifacts;
  double wall_time = 0.0;
  double boundary_leak = 0.0;
};

/// Runs the selected solver and writes observables.csv, RSFW1 snapshots,
/// rays.csv (rays solver) and manifest.json into out_dir. Exit codes: 0 ok,
/// 2 configuration error, 3 numerical abort.
RunResult run(const RunConfig& cfg, const std::filesystem::path& out_dir,
              const std::filesystem::path& base_dir = {});

enum class SweepMode { nls, wkb, both };

struct SweepResult {
  std::vector<double> eps;
  std::vector<double> density_l1;    ///< || |psi^eps|^2 - rho0 ||_L1 (nls)
  std::vector<double> current_l2;    ///< || J^eps - rho0 u0 ||_L2 (nls)
  std::vector<double> amplitude_l2;  ///< || a^eps - a0 ||_L2 (wkb)
  std::vector<double> wall_time;
  struct Fit {
    double slope = 0.0, intercept = 0.0;
    bool floor_limited = false;
    bool valid = false;
  };
  Fit density_fit, current_fit, amplitude_fit;
};

/// A member run failed; `partial` holds the metrics computed so far (NaN
/// for runs that did not complete).
class SweepAborted : public std::runtime_error {
 public:
  SweepAborted(const std::string& what, SweepResult partial)
      : std::runtime_error(what), partial(std::move(partial)) {}
  SweepResult partial;
};

/// Least-squares line through (log eps, log err). floor_limited when every
/// error sits below 1e-9.
SweepResult::Fit fit_loglog(const std::vector<double>& eps, const std::vector<double>& err);

/// eps_list: at least three values, strictly decreasing. Runs one wkb eps = 0
/// reference plus, per eps, the nls and/or wkb solver from matched WKB data
/// and compares at t = T. Runs execute on up to ROTORWKB_THREADS workers.
SweepResult epsilon_sweep(const RunConfig& base, const std::vector<double>& eps_list, double T,
                          SweepMode mode = SweepMode::both, const std::filesystem::path& base_dir = {});

/// WKB step size: min(requested, 0.9 of the advective and dispersive bounds).
double stable_wkb_dt(const RunConfig& cfg, double eps, double requested);

struct FieldMetrics {
  double l1 = 0.0, l2 = 0.0, linf = 0.0, hs = 0.0;
  double gauge_l2 = 0.0;  ///< min over theta of ||A - e^{i theta} B||_L2
};

/// Throws GridMismatch on differing grids.
FieldMetrics compare_fields(const ComplexField& a, const ComplexField& b, double s = 4.0);
FieldMetrics compare_files(const std::filesystem::path& a, const std::filesystem::path& b, double s = 4.0);

/// Worker cap from ROTORWKB_THREADS (default: hardware concurrency, at least 1).
unsigned worker_count();

}  // namespace rotorwkb::harness
