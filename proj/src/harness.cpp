#include "rotorwkb/harness.hpp"

#include <openssl/evp.h>

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fftw3.h>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "rotorwkb/finite_difference.hpp"
#include "rotorwkb/nls_spectral.hpp"
#include "rotorwkb/observables.hpp"
#include "rotorwkb/snapshot.hpp"
#include "rotorwkb/wkb_hydro.hpp"

namespace rotorwkb::harness {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kSlopeThreshold = 0.9;

fs::path resolve(const std::string& p, const fs::path& base_dir) {
  fs::path path(p);
  return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
}

Snapshot load_matching(const std::string& p, const fs::path& base_dir, const GridSpec& g, const char* key) {
  const fs::path path = resolve(p, base_dir);
  if (!fs::exists(path)) throw ConfigError(std::string(key) + ": file not found: " + path.string());
  Snapshot s = read_snapshot(path);
  if (!(s.field.grid == g)) throw ConfigError(std::string(key) + ": snapshot grid does not match [grid]");
  return s;
}

std::size_t step_count(double T, double dt) {
  if (T == 0.0) return 0;
  const auto full = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
  const double rest = T - static_cast<double>(full) * dt;
  return full + (std::abs(rest) > 1e-12 * std::max(1.0, std::abs(T)) ? 1 : 0);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

std::string step_name(const char* stem, std::size_t step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06zu.rsfw", stem, step);
  return buf;
}

/// Observables of an eps = 0 state from density and total velocity.
ObservableRecord hydro_record(double t, const ScalarField& rho, const VectorField& U, const SimParams& p) {
  ObservableRecord r;
  r.t = t;
  const double dV = rho.grid.cell_measure();
  double mass = 0.0, energy = 0.0;
  for_each_node(rho.grid, [&](std::size_t i, const Point& x) {
    double u2 = 0.0;
    for (const auto& c : U) u2 += c.values[i] * c.values[i];
    const double q = rho.values[i];
    mass += q;
    energy += 0.5 * q * u2 + eval_potential(p, x) * q + p.nonlinearity.G(q);
  });
  r.mass = mass * dV;
  r.m_eps = limit_angular_momentum(rho, U);
  r.energy = energy * dV + p.Omega * r.m_eps;
  const Moments mo = moments(rho, U);
  r.n = mo.n;
  r.X = mo.X;
  r.xy = mo.xy;
  return r;
}

ScalarField density(const ComplexField& a) {
  ScalarField rho(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) rho.values[i] = std::norm(a.values[i]);
  return rho;
}

/// grad S(t) + v: the physical velocity carried by a WKB state.
VectorField total_velocity(const wkb::WKBState& s, const wkb::DriftFields& drift, const SimParams& p) {
  VectorField U = s.v;
  for_each_node(s.grid(), [&](std::size_t i, const Point& x) {
    const Point xp = perp(x);
    for (int j = 0; j < s.grid().dim; ++j) U[j].values[i] += drift.w[j].values[i] + p.Omega * xp[j];
  });
  return U;
}

ComplexField real_to_field(const ScalarField& f) { return to_complex(f); }

void require_smooth_phase(const RunConfig& cfg) {
  if (cfg.phase.kind == PhaseData::Kind::file)
    throw ConfigError("[run].phase: the " + solver_name(cfg.solver) + " solver needs a zero or quadratic phase");
}

struct RunContext {
  const RunConfig& cfg;
  fs::path out_dir;
  fs::path base_dir;
  std::vector<fs::path> artifacts;
  double boundary_leak = 0.0;
  json extra = json::object();

  void snapshot(const std::string& name, const ComplexField& f, double eps, double t, const std::string& tag) {
    write_snapshot(out_dir / name, Snapshot{f, eps, t, tag});
    artifacts.push_back(name);
  }

  void observables(const std::vector<ObservableRecord>& rows) {
    std::ofstream out(out_dir / "observables.csv", std::ios::binary);
    write_observables_csv(out, rows);
    artifacts.push_back("observables.csv");
  }
};

void run_nls(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  WaveField psi0;
  psi0.params = cfg.sim;
  psi0.psi = wkb_assemble(initial_amplitude(cfg, ctx.base_dir), initial_phase(cfg, ctx.base_dir), cfg.sim.eps);
  const std::size_t total = step_count(cfg.T, cfg.dt);
  std::vector<ObservableRecord> rows;
  nls::EvolveOptions opts;
  opts.stride = 1;
  opts.observer = [&](const WaveField& w, std::size_t step) {
    const bool last = step == total;
    ctx.boundary_leak = std::max(ctx.boundary_leak, boundary_max(w.psi));
    if (step % cfg.stride == 0 || last) rows.push_back(observe(w));
    if (step == 0 || last || (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0))
      ctx.snapshot(step_name("psi", step), w.psi, cfg.sim.eps, w.t, "psi");
  };
  nls::evolve_nls(psi0, cfg.T, cfg.dt, opts);
  ctx.observables(rows);
}

std::unique_ptr<wkb::DriftSource> make_drift(const RunConfig& cfg) {
  return std::make_unique<wkb::QuadraticDrift>(initial_quadratic_phase(cfg), cfg.sim, cfg.T, std::min(cfg.dt, 1e-3));
}

void run_wkb(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  require_smooth_phase(cfg);
  const double eps = cfg.limit ? 0.0 : cfg.sim.eps;
  const auto drift = make_drift(cfg);
  const wkb::WKBState s0 = wkb::make_wkb_state(initial_amplitude(cfg, ctx.base_dir), eps, true);
  const std::size_t total = step_count(cfg.T, cfg.dt);
  const int d = cfg.sim.dim;
  std::vector<ObservableRecord> rows;
  wkb::WKBOptions opts;
  opts.stride = 1;
  opts.keep_states = false;
  opts.observer = [&](const wkb::WKBState& s, std::size_t step) {
    const bool last = s.t >= s0.t + cfg.T - 1e-12 * std::max(1.0, cfg.T) || step == total;
    const ComplexField a = s.amplitude();
    ctx.boundary_leak = std::max(ctx.boundary_leak, boundary_max(a));
    if (step % cfg.stride == 0 || last) {
      if (eps > 0.0) {
        ScalarField phase = drift->phase(s.t, s.grid());
        for (std::size_t i = 0; i < phase.size(); ++i) phase.values[i] += s.phi->values[i];
        WaveField w{wkb_assemble(a, phase, eps), s.t, cfg.sim};
        rows.push_back(observe(w));
      } else {
        rows.push_back(hydro_record(s.t, density(a), total_velocity(s, drift->drift(s.t, s.grid()), cfg.sim), cfg.sim));
      }
    }
    if (step == 0 || last || (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0)) {
      ctx.snapshot(step_name("alpha", step), real_to_field(s.alpha), eps, s.t, "alpha");
      ctx.snapshot(step_name("beta", step), real_to_field(s.beta), eps, s.t, "beta");
      for (int j = 0; j < d; ++j) {
        const std::string tag = "v" + std::to_string(j + 1);
        ctx.snapshot(step_name(tag.c_str(), step), real_to_field(s.v[j]), eps, s.t, tag);
      }
      ctx.snapshot(step_name("phi", step), real_to_field(*s.phi), eps, s.t, "phi");
    }
  };
  wkb::evolve_wkb(s0, *drift, cfg.sim, cfg.T, cfg.dt, opts);
  ctx.observables(rows);
}

void run_hydro(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  require_smooth_phase(cfg);
  const int d = cfg.sim.dim;
  const rays::QuadraticPhase q = initial_quadratic_phase(cfg);
  wkb::HydroState h0;
  h0.rho = density(initial_amplitude(cfg, ctx.base_dir));
  h0.v.assign(d, ScalarField(h0.rho.grid));
  for_each_node(h0.rho.grid, [&](std::size_t i, const Point& x) {
    rays::Vec xv(d);
    for (int j = 0; j < d; ++j) xv[j] = x[j];
    const rays::Vec g = q.gradient(xv);
    for (int j = 0; j < d; ++j) h0.v[j].values[i] = g[j];
  });
  std::vector<ObservableRecord> rows;
  wkb::WKBOptions opts;
  opts.keep_states = false;
  opts.stride = 1;
  opts.observer = [&](const wkb::WKBState& s, std::size_t step) {
    const bool last = s.t >= cfg.T - 1e-12 * std::max(1.0, cfg.T);
    const ScalarField rho = density(s.amplitude());
    ctx.boundary_leak = std::max(ctx.boundary_leak, boundary_max(s.amplitude()));
    if (step % cfg.stride == 0 || last) rows.push_back(hydro_record(s.t, rho, s.v, cfg.sim));
    if (step == 0 || last || (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0)) {
      ctx.snapshot(step_name("rho", step), real_to_field(rho), 0.0, s.t, "rho");
      for (int j = 0; j < d; ++j) {
        const std::string tag = "v" + std::to_string(j + 1);
        ctx.snapshot(step_name(tag.c_str(), step), real_to_field(s.v[j]), 0.0, s.t, tag);
      }
    }
  };
  wkb::evolve_hydro(h0, cfg.sim, cfg.T, cfg.dt, opts);
  ctx.observables(rows);
}

void run_rays(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const int d = cfg.sim.dim;
  const rays::PhaseFunction S = initial_quadratic_phase(cfg).as_function();
  std::vector<double> axis(cfg.ray_count, 0.0);
  for (int k = 0; k < cfg.ray_count && cfg.ray_count > 1; ++k)
    axis[k] = -cfg.ray_extent + 2.0 * cfg.ray_extent * k / (cfg.ray_count - 1);
  std::size_t count = 1;
  for (int j = 0; j < d; ++j) count *= axis.size();
  std::vector<rays::RayTrajectory> bundle;
  int caustics = 0;
  for (std::size_t r = 0; r < count; ++r) {
    rays::Vec x0(d);
    std::size_t rem = r;
    for (int j = d - 1; j >= 0; --j) {
      x0[j] = axis[rem % axis.size()];
      rem /= axis.size();
    }
    bundle.push_back(rays::integrate_ray(rays::make_ray(x0, S), cfg.sim, cfg.dt, cfg.T, cfg.stride));
    if (bundle.back().status == rays::FlowStatus::caustic) ++caustics;
  }
  {
    std::ofstream out(ctx.out_dir / "rays.csv", std::ios::binary);
    rays::write_ray_csv(out, bundle, d);
  }
  ctx.artifacts.push_back("rays.csv");
  ctx.extra["rays"] = count;
  ctx.extra["caustic_rays"] = caustics;
}

void write_manifest(const RunContext& ctx, const RunResult& res) {
  json m;
  m["solver"] = solver_name(ctx.cfg.solver);
  m["status"] = res.exit_code == 0 ? "ok" : "failed";
  m["exit_code"] = res.exit_code;
  if (!res.message.empty()) m["message"] = res.message;
  m["config"] = serialize_config(ctx.cfg);
  json versions;
  versions["rotorwkb"] = kVersion;
  versions["fftw"] = std::string(fftw_version);
  versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  versions["compiler"] = __VERSION__;
  m["versions"] = versions;
  m["wall_time_s"] = res.wall_time;
  m["boundary_leak"] = res.boundary_leak;
  m["slope_threshold"] = kSlopeThreshold;
  for (const auto& [k, v] : ctx.extra.items()) m[k] = v;
  json arts = json::array();
  for (const auto& a : ctx.artifacts) {
    const fs::path p = ctx.out_dir / a;
    arts.push_back({{"path", a.generic_string()}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  m["artifacts"] = arts;
  std::ofstream out(ctx.out_dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ComplexField initial_amplitude(const RunConfig& cfg, const fs::path& base_dir) {
  switch (cfg.initial.kind) {
    case InitialData::Kind::gaussian: return make_gaussian(cfg.grid, cfg.initial.center, cfg.initial.width);
    case InitialData::Kind::vortex: return make_vortex_init(cfg.grid, cfg.initial.winding, cfg.initial.width);
    case InitialData::Kind::file: return load_matching(cfg.initial.path, base_dir, cfg.grid, "[run].initial_file").field;
  }
  return ComplexField(cfg.grid);
}

ScalarField initial_phase(const RunConfig& cfg, const fs::path& base_dir) {
  switch (cfg.phase.kind) {
    case PhaseData::Kind::zero: return ScalarField(cfg.grid);
    case PhaseData::Kind::quadratic: {
      const auto q = initial_quadratic_phase(cfg);
      const int d = cfg.sim.dim;
      return sample<double>(cfg.grid, [&](const Point& x) {
        rays::Vec xv(d);
        for (int j = 0; j < d; ++j) xv[j] = x[j];
        return q.value(xv);
      });
    }
    case PhaseData::Kind::file:
      return real_part(load_matching(cfg.phase.path, base_dir, cfg.grid, "[run].phase_file").field);
  }
  return ScalarField(cfg.grid);
}

rays::QuadraticPhase initial_quadratic_phase(const RunConfig& cfg) {
  const int d = cfg.sim.dim;
  rays::QuadraticPhase q = rays::QuadraticPhase::zero(d);
  if (cfg.phase.kind != PhaseData::Kind::quadratic) return q;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) q.Sigma(i, j) = cfg.phase.sigma0.at(i * d + j);
    q.b[i] = cfg.phase.b0.at(i);
  }
  q.c = cfg.phase.c0;
  return q;
}

RunResult run(const RunConfig& cfg, const fs::path& out_dir, const fs::path& base_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  RunContext ctx{cfg, out_dir, base_dir, {}, 0.0, json::object()};
  RunResult res;
  try {
    cfg.sim.validate();
    cfg.grid.validate();
    switch (cfg.solver) {
      case Solver::nls: run_nls(ctx); break;
      case Solver::wkb: run_wkb(ctx); break;
      case Solver::hydro: run_hydro(ctx); break;
      case Solver::rays: run_rays(ctx); break;
    }
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.message = e.what();
  } catch (const CflViolation& e) {
    res.exit_code = 2;
    res.message = e.what();
  } catch (const std::invalid_argument& e) {
    res.exit_code = 2;
    res.message = e.what();
  } catch (const NumericalAbort& e) {
    res.exit_code = 3;
    res.message = e.what();
  } catch (const std::runtime_error& e) {
    res.exit_code = 3;
    res.message = e.what();
  }
  res.wall_time = seconds_since(t0);
  res.boundary_leak = ctx.boundary_leak;
  write_manifest(ctx, res);
  res.artifacts = ctx.artifacts;
  res.artifacts.push_back("manifest.json");
  return res;
}

double stable_wkb_dt(const RunConfig& cfg, double eps, double requested) {
  double dx = cfg.grid.spacing(0);
  for (int j = 1; j < cfg.grid.dim; ++j) dx = std::min(dx, cfg.grid.spacing(j));
  const auto drift = make_drift(cfg);
  double speed = 0.0;
  for (int k = 0; k <= 4; ++k) speed = std::max(speed, drift->max_speed(0.25 * k * cfg.T, cfg.grid));
  double dt = requested;
  if (speed > 0.0) dt = std::min(dt, 0.9 * 0.5 * dx / speed);
  if (eps > 0.0) dt = std::min(dt, 0.9 * 0.2 * dx * dx / eps);
  return dt;
}

SweepResult::Fit fit_loglog(const std::vector<double>& eps, const std::vector<double>& err) {
  SweepResult::Fit fit;
  std::vector<double> lx, ly;
  bool all_small = !err.empty();
  for (std::size_t i = 0; i < eps.size() && i < err.size(); ++i) {
    if (!(err[i] < 1e-9)) all_small = false;
    if (eps[i] > 0.0 && err[i] > 0.0 && std::isfinite(err[i])) {
      lx.push_back(std::log(eps[i]));
      ly.push_back(std::log(err[i]));
    }
  }
  fit.floor_limited = all_small;
  if (lx.size() < 2) return fit;
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.valid = true;
  return fit;
}

namespace {

struct SweepTask {
  enum class Kind { reference, nls, wkb } kind;
  std::size_t index = 0;  // into eps_list
};

struct TaskOutput {
  bool done = false;
  std::string error;
  double wall = 0.0;
  ComplexField field;   // psi (nls) or amplitude (wkb)
  VectorField velocity;  // reference: total velocity
};

}  // namespace

SweepResult epsilon_sweep(const RunConfig& base, const std::vector<double>& eps_list, double T, SweepMode mode,
                          const fs::path& base_dir) {
  if (eps_list.size() < 3) throw ConfigError("sweep: need at least three eps values");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw ConfigError("sweep: eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ConfigError("sweep: eps list must be strictly decreasing");
  }
  if (!(T >= 0.0)) throw ConfigError("sweep: T must be nonnegative");
  RunConfig cfg = base;
  cfg.T = T;
  require_smooth_phase(cfg);

  const ComplexField a_in = initial_amplitude(cfg, base_dir);
  const ScalarField phi_in = initial_phase(cfg, base_dir);
  const wkb::QuadraticDrift drift(initial_quadratic_phase(cfg), cfg.sim, T, std::min(cfg.dt, 1e-3));
  const bool want_nls = mode != SweepMode::wkb;
  const bool want_wkb = mode != SweepMode::nls;

  std::vector<SweepTask> tasks{{SweepTask::Kind::reference, 0}};
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (want_nls) tasks.push_back({SweepTask::Kind::nls, i});
    if (want_wkb) tasks.push_back({SweepTask::Kind::wkb, i});
  }
  std::vector<TaskOutput> outputs(tasks.size());

  auto execute = [&](std::size_t k) {
    const SweepTask& task = tasks[k];
    TaskOutput& out = outputs[k];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (task.kind == SweepTask::Kind::nls) {
        WaveField w;
        w.params = cfg.sim;
        w.params.eps = eps_list[task.index];
        w.psi = wkb_assemble(a_in, phi_in, w.params.eps);
        out.field = nls::evolve_nls(w, T, cfg.dt).psi;
      } else {
        const double eps = task.kind == SweepTask::Kind::reference ? 0.0 : eps_list[task.index];
        wkb::WKBOptions opts;
        opts.keep_states = false;
        std::optional<wkb::WKBState> last;
        opts.observer = [&](const wkb::WKBState& s, std::size_t) { last = s; };
        const wkb::WKBState s0 = wkb::make_wkb_state(a_in, eps, false);
        wkb::evolve_wkb(s0, drift, cfg.sim, T, stable_wkb_dt(cfg, eps, cfg.dt), opts);
        out.field = last->amplitude();
        if (task.kind == SweepTask::Kind::reference)
          out.velocity = total_velocity(*last, drift.drift(last->t, last->grid()), cfg.sim);
      }
      out.done = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.wall = seconds_since(t0);
  };

  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) execute(k);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  // Single-threaded reduction in eps order.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SweepResult res;
  res.eps = eps_list;
  const std::size_t ne = eps_list.size();
  res.density_l1.assign(want_nls ? ne : 0, nan);
  res.current_l2.assign(want_nls ? ne : 0, nan);
  res.amplitude_l2.assign(want_wkb ? ne : 0, nan);
  res.wall_time.assign(ne, 0.0);
  std::string failure;
  const TaskOutput& ref = outputs[0];
  if (!ref.done) failure = "eps = 0 reference: " + ref.error;

  const GridSpec& g = cfg.grid;
  const double dV = g.cell_measure();
  ScalarField rho0(g);
  VectorField J0;
  if (ref.done) {
    rho0 = density(ref.field);
    J0 = ref.velocity;
    for (auto& c : J0)
      for (std::size_t i = 0; i < c.size(); ++i) c.values[i] *= rho0.values[i];
  }
  for (std::size_t k = 1; k < tasks.size(); ++k) {
    const SweepTask& task = tasks[k];
    const TaskOutput& out = outputs[k];
    res.wall_time[task.index] += out.wall;
    if (!out.done) {
      if (failure.empty())
        failure = std::string(task.kind == SweepTask::Kind::nls ? "nls" : "wkb") +
                  " run at eps = " + format_double(eps_list[task.index]) + ": " + out.error;
      continue;
    }
    if (!ref.done) continue;
    const double eps = eps_list[task.index];
    if (task.kind == SweepTask::Kind::nls) {
      double l1 = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) l1 += std::abs(std::norm(out.field.values[i]) - rho0.values[i]);
      res.density_l1[task.index] = l1 * dV;
      const VectorField J = current(out.field, eps);
      double l2 = 0.0;
      for (std::size_t j = 0; j < J.size(); ++j)
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double e = J[j].values[i] - J0[j].values[i];
          l2 += e * e;
        }
      res.current_l2[task.index] = std::sqrt(l2 * dV);
    } else {
      double l2 = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) l2 += std::norm(out.field.values[i] - ref.field.values[i]);
      res.amplitude_l2[task.index] = std::sqrt(l2 * dV);
    }
  }
  if (want_nls) {
    res.density_fit = fit_loglog(res.eps, res.density_l1);
    res.current_fit = fit_loglog(res.eps, res.current_l2);
  }
  if (want_wkb) res.amplitude_fit = fit_loglog(res.eps, res.amplitude_l2);
  if (!failure.empty()) throw SweepAborted("sweep aborted: " + failure, std::move(res));
  return res;
}

FieldMetrics compare_fields(const ComplexField& a, const ComplexField& b, double s) {
  require_same_grid(a.grid, b.grid, "compare_fields");
  const double dV = a.grid.cell_measure();
  FieldMetrics m;
  ComplexField diff(a.grid);
  cplx overlap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx e = a.values[i] - b.values[i];
    diff.values[i] = e;
    const double ae = std::abs(e);
    m.l1 += ae;
    m.l2 += ae * ae;
    m.linf = std::max(m.linf, ae);
    overlap += std::conj(b.values[i]) * a.values[i];
  }
  m.l1 *= dV;
  m.l2 = std::sqrt(m.l2 * dV);
  m.hs = sobolev_norm(diff, s);
  const cplx rot = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0, 0.0);
  double g2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) g2 += std::norm(a.values[i] - rot * b.values[i]);
  m.gauge_l2 = std::sqrt(g2 * dV);
  return m;
}

FieldMetrics compare_files(const fs::path& a, const fs::path& b, double s) {
  const Snapshot sa = read_snapshot(a);
  const Snapshot sb = read_snapshot(b);
  return compare_fields(sa.field, sb.field, s);
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ROTORWKB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

}  // namespace rotorwkb::harness
