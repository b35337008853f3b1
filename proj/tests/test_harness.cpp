#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rotorwkb/harness.hpp"
#include "rotorwkb/nls_spectral.hpp"
#include "rotorwkb/snapshot.hpp"

using namespace rotorwkb;
using namespace rotorwkb::harness;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(# minimal
[sim]
eps = 0.25

[grid]
N = 32
L = 6

[run]
solver = nls
T = 0.05
)";

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rotorwkb_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("harness_cli") {

TEST_CASE("minimal config takes documented defaults") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.sim.eps == 0.25);
  CHECK(c.sim.Omega == 0.0);
  CHECK(c.dt == nls::default_dt(c.sim));
  CHECK(c.dt == 1e-3);
  CHECK(c.stride == 10);
  CHECK(c.snapshot_every == 0);
  CHECK(c.grid == GridSpec::cube(2, 32, 6.0));
  CHECK(c.solver == Solver::nls);
  CHECK(c.output == "out");

  std::string slow = kMinimal;
  slow.replace(slow.find("eps = 0.25"), 10, "eps = 0.25\nomega = 0.5, 0.25");
  CHECK(parse_config(slow).dt == doctest::Approx(2e-3));
}

TEST_CASE("configuration errors name the key") {
  std::string neg = kMinimal;
  neg.replace(neg.find("eps = 0.25"), 10, "eps = -1");
  CHECK(error_of(neg).find("[sim].eps") != std::string::npos);
  CHECK(error_of(neg).find("positive") != std::string::npos);

  std::string typo = kMinimal;
  typo.replace(typo.find("T = 0.05"), 8, "T = 0.05\nstrid = 3");
  CHECK(error_of(typo).find("[run].strid") != std::string::npos);

  std::string missing = kMinimal;
  missing.replace(missing.find("N = 32"), 6, "");
  CHECK(error_of(missing).find("[grid].N") != std::string::npos);

  CHECK(error_of(std::string(kMinimal) + "[extra]\n").find("[extra]") != std::string::npos);
  std::string bad_omega = kMinimal;
  bad_omega.replace(bad_omega.find("eps = 0.25"), 10, "eps = 0.25\nomega = 1");
  CHECK(error_of(bad_omega).find("[sim].omega") != std::string::npos);
  std::string quad = kMinimal;
  quad += "phase = quadratic\nsigma0 = 1, 2, 3, 4\n";
  CHECK(error_of(quad).find("symmetric") != std::string::npos);
}

TEST_CASE("serialize and parse round trip") {
  std::string text = kMinimal;
  text.replace(text.find("eps = 0.25"), 10,
               "eps = 0.1\nOmega = 0.3\nomega = 1.7, 0.30000000000000004\nnonlinearity = cubic\ncoupling = 2.5");
  text += "dt = 0.0007\nstride = 3\nsnapshot_every = 7\ninitial = vortex\nwinding = -2\nwidth = 1.1\n"
          "phase = quadratic\nsigma0 = 0.1, 0.2, 0.2, -0.3\nb0 = 1e-3, 2\nc0 = 0.5\nray_count = 4\noutput = runs/a\n";
  const RunConfig c = parse_config(text);
  const std::string s = serialize_config(c);
  CHECK(parse_config(s) == c);
  CHECK(serialize_config(parse_config(s)) == s);
  CHECK(parse_config(serialize_config(parse_config(kMinimal))) == parse_config(kMinimal));
}

TEST_CASE("overrides") {
  RunConfig c = parse_config(kMinimal);
  apply_overrides(c, {{"sim.Omega", "0.75"}, {"run.stride", "5"}});
  CHECK(c.sim.Omega == 0.75);
  CHECK(c.stride == 5);
  CHECK_THROWS_AS(apply_overrides(c, {{"sim.nope", "1"}}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(c, {{"run.T", "-1"}}), ConfigError);
  apply_overrides(c, {{"sim.omega", "0.5, 0.5"}});
  CHECK(c.dt == doctest::Approx(2e-3));
}

TEST_CASE("T = 0 run writes the initial snapshot and one row") {
  RunConfig c = parse_config(kMinimal);
  c.T = 0.0;
  const fs::path dir = scratch_dir("t0");
  const RunResult r = run(c, dir);
  REQUIRE(r.exit_code == 0);
  const std::string csv = slurp(dir / "observables.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(fs::exists(dir / "psi_000000.rsfw"));
  CHECK(fs::exists(dir / "manifest.json"));
  const Snapshot s = read_snapshot(dir / "psi_000000.rsfw");
  CHECK(s.t == 0.0);
  CHECK(s.eps == 0.25);
  const std::string manifest = slurp(dir / "manifest.json");
  for (const char* key : {"\"config\"", "\"versions\"", "\"wall_time_s\"", "\"boundary_leak\"", "\"sha256\"", "psi_000000.rsfw", "observables.csv"})
    CHECK(manifest.find(key) != std::string::npos);
}

TEST_CASE("runs are deterministic") {
  RunConfig c = parse_config(kMinimal);
  c.sim.Omega = 0.5;
  c.initial.center = {0.5, 0.2, 0.0};
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  REQUIRE(run(c, a).exit_code == 0);
  REQUIRE(run(c, b).exit_code == 0);
  CHECK(slurp(a / "observables.csv") == slurp(b / "observables.csv"));
  CHECK(slurp(a / "psi_000050.rsfw") == slurp(b / "psi_000050.rsfw"));
}

TEST_CASE("each solver runs from a config") {
  for (Solver s : {Solver::wkb, Solver::hydro, Solver::rays}) {
    RunConfig c = parse_config(kMinimal);
    c.solver = s;
    c.dt = 5e-3;
    c.sim.Omega = 0.5;
    c.phase.kind = PhaseData::Kind::quadratic;
    c.phase.sigma0 = {0.1, 0.0, 0.0, 0.1};
    c.phase.b0 = {0.0, 0.1};
    const fs::path dir = scratch_dir("solver_" + solver_name(s));
    const RunResult r = run(c, dir);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / (s == Solver::rays ? "rays.csv" : "observables.csv")));
  }
  RunConfig c = parse_config(kMinimal);
  c.solver = Solver::wkb;
  c.dt = 0.5;
  CHECK(run(c, scratch_dir("cfl")).exit_code == 2);
  c.initial.kind = InitialData::Kind::file;
  c.initial.path = "does/not/exist.rsfw";
  c.solver = Solver::nls;
  const RunResult r = run(c, scratch_dir("missing"));
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("initial_file") != std::string::npos);
}

TEST_CASE("compare_fields") {
  const GridSpec g = GridSpec::cube(2, 32, 4.0);
  const ComplexField a = wkb_assemble(make_gaussian(g, {0.3, 0.0, 0.0}, 0.8),
                                      sample<double>(g, [](const Point& x) { return 0.1 * x[0]; }), 0.1);
  const FieldMetrics self = compare_fields(a, a);
  CHECK(self.l1 == 0.0);
  CHECK(self.l2 == 0.0);
  CHECK(self.linf == 0.0);
  CHECK(self.hs == 0.0);
  CHECK(self.gauge_l2 == 0.0);
  ComplexField b = a;
  for (auto& z : b.values) z *= std::polar(1.0, std::numbers::pi / 3.0);
  const FieldMetrics rot = compare_fields(a, b);
  CHECK(rot.l2 == doctest::Approx(std::sqrt(mass(a))).epsilon(1e-12));  // |1 - e^{i pi/3}| = 1
  CHECK(rot.gauge_l2 < 1e-12);
  CHECK_THROWS_AS(compare_fields(a, ComplexField(GridSpec::cube(2, 16, 4.0))), GridMismatch);

  const fs::path dir = scratch_dir("cmp");
  fs::create_directories(dir);
  write_snapshot(dir / "a.rsfw", Snapshot{a, 0.1, 0.0, "psi"});
  write_snapshot(dir / "b.rsfw", Snapshot{b, 0.1, 0.0, "psi"});
  CHECK(compare_files(dir / "a.rsfw", dir / "a.rsfw").l2 == 0.0);
  CHECK(compare_files(dir / "a.rsfw", dir / "b.rsfw").gauge_l2 < 1e-12);
}

TEST_CASE("log-log fit") {
  const std::vector<double> eps{0.4, 0.2, 0.1};
  const auto f = fit_loglog(eps, {0.8, 0.4, 0.2});
  CHECK(f.valid);
  CHECK(f.slope == doctest::Approx(1.0));
  CHECK(f.intercept == doctest::Approx(std::log(2.0)));
  CHECK_FALSE(f.floor_limited);
  CHECK(fit_loglog(eps, {1e-12, 3e-13, 2e-12}).floor_limited);
}

TEST_CASE("sweep argument checks") {
  const RunConfig c = parse_config(kMinimal);
  CHECK_THROWS_AS(epsilon_sweep(c, {0.2, 0.1}, 0.1), ConfigError);
  CHECK_THROWS_AS(epsilon_sweep(c, {0.2, 0.1, 0.1}, 0.1), ConfigError);
  CHECK_THROWS_AS(epsilon_sweep(c, {0.1, 0.2, 0.3}, 0.1), ConfigError);
}

TEST_CASE("linear free sweep sits at the quadrature floor") {
  RunConfig c = parse_config(kMinimal);
  c.sim.Omega = 0.0;
  c.sim.omega = {0.0, 0.0, 1.0};
  c.sim.nonlinearity = Nonlinearity::none();
  c.dt = 1e-5;
  const SweepResult r = epsilon_sweep(c, {0.2, 0.1, 0.05}, 1e-5, SweepMode::nls);
  CHECK(r.density_fit.floor_limited);
  for (double e : r.density_l1) CHECK(e < 1e-9);
  CHECK(r.amplitude_l2.empty());
}

TEST_CASE("sweep with a failing member keeps partial results") {
  RunConfig c = parse_config(kMinimal);
  c.sim.nonlinearity = Nonlinearity::cubic(1e4);  // drives the eps = 0 system unstable
  c.sim.Omega = 0.5;
  try {
    epsilon_sweep(c, {0.2, 0.1, 0.05}, 0.5, SweepMode::both);
    FAIL("expected SweepAborted");
  } catch (const SweepAborted& e) {
    CHECK(std::string(e.what()).find("reference") != std::string::npos);
    CHECK(e.partial.eps.size() == 3);
    CHECK(std::isnan(e.partial.density_l1[0]));
    CHECK(e.partial.wall_time[0] > 0.0);
  }
}

TEST_CASE("worker cap") {
  setenv("ROTORWKB_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  unsetenv("ROTORWKB_THREADS");
  CHECK(worker_count() >= 1);
}

}  // TEST_SUITE
