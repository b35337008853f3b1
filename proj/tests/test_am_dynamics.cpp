#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "rotorwkb/harness.hpp"
#include "rotorwkb/nls_spectral.hpp"
#include "rotorwkb/observables.hpp"

using namespace rotorwkb;

namespace {

SimParams params(double eps, double Omega, double w1, double w2) {
  SimParams p;
  p.eps = eps;
  p.Omega = Omega;
  p.omega = {w1, w2, 1.0};
  return p;
}

std::vector<ObservableRecord> record_run(const SimParams& p, const GridSpec& g, double T, double dt) {
  WaveField w{make_gaussian(g, {1.0, 0.5, 0.0}, std::sqrt(0.5)), 0.0, p};
  std::vector<ObservableRecord> rec;
  nls::EvolveOptions opts;
  opts.observer = [&](const WaveField& s, std::size_t) { rec.push_back(observe(s)); };
  nls::evolve_nls(w, T, dt, opts);
  return rec;
}

/// max |dm/dt - Omega n - (w1^2 - w2^2) xy| / max |Omega n + (w1^2 - w2^2) xy| with centred differences.
double moment_law_discrepancy(const std::vector<ObservableRecord>& rec, const SimParams& p, double dt) {
  const double c = p.omega[0] * p.omega[0] - p.omega[1] * p.omega[1];
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 1; k + 1 < rec.size(); ++k) {
    const double mdot = (rec[k + 1].m_eps - rec[k - 1].m_eps) / (2.0 * dt);
    const double law = p.Omega * rec[k].n + c * rec[k].xy;
    worst = std::max(worst, std::abs(mdot - law));
    scale = std::max(scale, std::abs(law));
  }
  return worst / scale;
}

}  // namespace

TEST_SUITE("am_dynamics") {

TEST_CASE("isotropic trap: dm/dt follows Omega n") {
  const double dt = 1e-3;
  const SimParams p = params(0.125, 1.0, 1.0, 1.0);
  const auto rec = record_run(p, GridSpec::cube(2, 128, 8.0), 1.0, dt);
  CHECK(moment_law_discrepancy(rec, p, dt) <= p.eps + dt * dt);
}

TEST_CASE("anisotropic trap: dm/dt - Omega n follows 3 <x1 x2>") {
  const double dt = 1e-3;
  const SimParams p = params(0.125, 0.5, 2.0, 1.0);
  const auto rec = record_run(p, GridSpec::cube(2, 128, 8.0), 1.0, dt);
  CHECK(moment_law_discrepancy(rec, p, dt) <= p.eps + dt * dt);
}

TEST_CASE("without rotation the semiclassical residual is small") {
  const double dt = 1e-3;
  for (double eps : {0.125, 0.0625}) {
    const SimParams p = params(eps, 0.0, 1.0, 1.0);
    const auto rec = record_run(p, GridSpec::cube(2, 128, 8.0), 1.0, dt);
    double worst = 0.0;
    for (double r : semiclassical_am_relation(rec, 0.0)) worst = std::max(worst, std::abs(r));
    CHECK(worst <= eps);
  }
}

TEST_CASE("vortex run: m_eps oscillates at the closed-form frequency") {
  harness::RunConfig cfg;
  cfg.sim = params(0.25, 1.0, 1.0, 1.0);
  cfg.grid = GridSpec::cube(2, 128, 8.0);
  cfg.T = 10.0;
  cfg.dt = 1e-3;
  cfg.stride = 10;
  cfg.initial.kind = harness::InitialData::Kind::vortex;
  cfg.initial.width = 1.0;
  const auto dir = std::filesystem::temp_directory_path() / "rotorwkb_test_vortex_am";
  std::filesystem::remove_all(dir);
  REQUIRE(harness::run(cfg, dir).exit_code == 0);

  std::ifstream in(dir / "observables.csv");
  std::string line;
  std::getline(in, line);
  std::vector<double> m;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (int col = 0; col <= 3 && std::getline(ss, cell, ','); ++col)
      if (col == 3) m.push_back(std::stod(cell));
  }
  REQUIRE(m.size() == 1001);
  const double kappa = std::sqrt(4.0 + 2.0);
  CHECK(dominant_frequency(m, cfg.dt * cfg.stride) == doctest::Approx(kappa).epsilon(0.02));
}

}  // TEST_SUITE
