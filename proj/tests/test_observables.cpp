#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rotorwkb/nls_spectral.hpp"
#include "rotorwkb/observables.hpp"

using namespace rotorwkb;

namespace {

SimParams free_params(double eps) {
  SimParams p;
  p.eps = eps;
  p.Omega = 0.0;
  p.omega = {0.0, 0.0, 0.0};
  p.nonlinearity = Nonlinearity::none();
  return p;
}

MomentODEParams isotropic_params() {
  MomentODEParams p;
  p.Omega = 0.7;
  p.omega1 = p.omega2 = 1.3;
  p.omega_perp_sq = 1.69;
  p.delta = 0.0;
  p.E0 = 1.1;
  p.m0 = 0.2;
  p.n0 = -0.3;
  p.X0 = 0.9;
  return p;
}

}  // namespace

TEST_SUITE("observables") {

TEST_CASE("mass") {
  const GridSpec g = GridSpec::cube(2, 32, 4.0);
  CHECK(mass(ComplexField(g)) == 0.0);
  const auto v = make_vortex_init(g, 2, 1.0);
  CHECK(mass(v) == doctest::Approx(1.0).epsilon(1e-12));
  WaveField w{v, 0.0, SimParams{}};
  const nls::SplitStepPlan plan(g, w.params, 0.01);
  for (int k = 0; k < 50; ++k) w = nls::strang_step(plan, w);
  CHECK(mass(w.psi) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("energy of a plane wave") {
  const GridSpec g = GridSpec::cube(2, 32, 4.0);
  const double eps = 0.3, k1 = 3.0 * std::numbers::pi / 4.0, k2 = -std::numbers::pi / 2.0;
  const auto psi = sample<cplx>(g, [&](const Point& x) { return std::polar(0.6, k1 * x[0] + k2 * x[1]); });
  const SimParams p = free_params(eps);
  CHECK(energy(ComplexField(g), p) == 0.0);
  CHECK(energy(psi, p) == doctest::Approx(eps * eps * (k1 * k1 + k2 * k2) / 2.0 * mass(psi)).epsilon(1e-12));
  const auto cur = current(psi, eps);
  CHECK(cur[0].values[17] == doctest::Approx(eps * k1 * 0.36));
  CHECK(cur[1].values[17] == doctest::Approx(eps * k2 * 0.36));
}

TEST_CASE("rotation term of the energy equals Omega m") {
  const GridSpec g = GridSpec::cube(2, 64, 6.0);
  SimParams p;
  p.eps = 0.2;
  p.Omega = 0.0;
  const auto psi = wkb_assemble(make_gaussian(g, {0.5, -0.3, 0.0}, 0.8),
                                sample<double>(g, [](const Point& x) { return 0.3 * x[0] * x[1] + 0.1 * x[1]; }), p.eps);
  const double e0 = energy(psi, p);
  p.Omega = 0.9;
  const auto detail = energy_detailed(psi, p);
  CHECK(detail.value - e0 == doctest::Approx(p.Omega * angular_momentum(psi, p.eps)).epsilon(1e-10));
  CHECK(std::abs(detail.imag_residue) < 1e-12);
}

TEST_CASE("angular momentum") {
  const GridSpec g = GridSpec::cube(2, 128, 8.0);
  const double eps = 0.25;
  CHECK(angular_momentum(make_gaussian(g, {0.4, 0.1, 0.0}, 1.0), eps) == doctest::Approx(0.0).epsilon(1e-14));
  for (int mw : {1, 2, -1}) {
    const auto psi = wkb_assemble(make_vortex_init(g, mw, 1.0), ScalarField(g), eps);
    CHECK(angular_momentum(psi, eps) == doctest::Approx(eps * mw * mass(psi)).epsilon(1e-8));
  }
  const auto radial = wkb_assemble(make_gaussian(g, {0.0, 0.0, 0.0}, 1.0),
                                   sample<double>(g, [](const Point& x) { return 0.2 * (x[0] * x[0] + x[1] * x[1]); }), eps);
  CHECK(std::abs(angular_momentum(radial, eps)) < 1e-12);
}

TEST_CASE("limit angular momentum") {
  const GridSpec g = GridSpec::cube(2, 128, 8.0);
  const auto a = make_gaussian(g, {0.3, -0.2, 0.0}, 1.0);
  ScalarField rho(g);
  for (std::size_t i = 0; i < g.size(); ++i) rho.values[i] = std::norm(a.values[i]);
  CHECK(limit_angular_momentum(rho, VectorField(2, ScalarField(g))) == 0.0);

  const double c = 0.7;
  VectorField v(2, ScalarField(g));
  double X = 0.0;
  for_each_node(g, [&](std::size_t i, const Point& x) {
    v[0].values[i] = -c * x[1];
    v[1].values[i] = c * x[0];
    X += (x[0] * x[0] + x[1] * x[1]) * rho.values[i];
  });
  CHECK(limit_angular_momentum(rho, v) == doctest::Approx(c * X * g.cell_measure()).epsilon(1e-12));

  // A smooth carrier phase carries the same current at every eps.
  const auto phi = sample<double>(g, [](const Point& x) { return 0.4 * x[0] * x[1] - 0.1 * x[0]; });
  VectorField gphi(2, ScalarField(g));
  for_each_node(g, [&](std::size_t i, const Point& x) {
    gphi[0].values[i] = 0.4 * x[1] - 0.1;
    gphi[1].values[i] = 0.4 * x[0];
  });
  for (double eps : {0.25, 0.125}) {
    const double m = angular_momentum(wkb_assemble(a, phi, eps), eps);
    CHECK(std::abs(m - limit_angular_momentum(rho, gphi)) < eps);
  }
}

TEST_CASE("moments") {
  const GridSpec g = GridSpec::cube(2, 128, 8.0);
  const double eps = 0.2;
  const auto centred = make_gaussian(g, {0.0, 0.0, 0.0}, 1.0);
  const Moments m = moments(centred, eps);
  CHECK(std::abs(m.xy) < 1e-14);
  CHECK(m.X == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(m.n) < 1e-14);
  const auto off = make_gaussian(g, {1.0, 0.5, 0.0}, 1.0);
  CHECK(moments(off, eps).xy == doctest::Approx(0.5).epsilon(1e-10));
  const auto stretched = wkb_assemble(centred, sample<double>(g, [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); }), eps);
  CHECK(moments(stretched, eps).n == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("moment ODE right-hand side") {
  MomentODEParams p = isotropic_params();
  const auto [mdot, ndot] = moment_ode_rhs(0.4, 0.0, 0.8, 0.0, p);
  CHECK(mdot == 0.0);
  CHECK(ndot == doctest::Approx(2.0 * (p.E0 - p.Omega * 0.4) - 2.0 * p.omega_perp_sq * 0.8));
  p.omega1 = 2.0;
  p.omega2 = 1.0;
  CHECK(moment_ode_rhs(0.0, 0.5, 1.0, 0.25, p).first == doctest::Approx(p.Omega * 0.5 + 3.0 * 0.25));
}

TEST_CASE("isotropic closed form") {
  MomentODEParams p = isotropic_params();
  CHECK(isotropic_closed_form(0.0, p) == doctest::Approx(p.m0).epsilon(1e-15));
  const auto ode = integrate_moment_ode(p, 10.0, 1e-3);
  double worst = 0.0;
  for (const auto& s : ode) worst = std::max(worst, std::abs(s.m - isotropic_closed_form(s.t, p)));
  CHECK(worst < 1e-8);

  MomentODEParams q = p;
  q.Omega = 0.0;
  q.n0 = 0.0;
  for (double t : {0.3, 1.7, 5.0}) CHECK(isotropic_closed_form(t, q) == doctest::Approx(q.m0).epsilon(1e-14));
  CHECK(isotropic_particular_value(q) == doctest::Approx(q.m0));

  MomentODEParams aniso = p;
  aniso.omega1 = 2.0;
  CHECK_THROWS(isotropic_closed_form(1.0, aniso));
}

TEST_CASE("dominant frequency") {
  std::vector<double> v;
  const double dt = 0.01, w = std::sqrt(6.0);
  for (int k = 0; k <= 1000; ++k) v.push_back(0.3 + 0.2 * std::cos(w * k * dt + 0.4));
  CHECK(dominant_frequency(v, dt) == doctest::Approx(w).epsilon(0.005));
}

TEST_CASE("semiclassical relation vanishes at t = 0") {
  std::vector<ObservableRecord> rows(3);
  for (int k = 0; k < 3; ++k) {
    rows[k].t = k;
    rows[k].m_eps = 0.1 * k;
    rows[k].X = 1.0 + 0.2 * k;
  }
  const auto r = semiclassical_am_relation(rows, 0.5);
  CHECK(r[0] == 0.0);
  CHECK(r[2] == doctest::Approx(0.2 - 0.25 * 0.4));
  CHECK(semiclassical_am_relation(rows, 0.0)[1] == doctest::Approx(0.1));
}

TEST_CASE("observables csv") {
  std::ostringstream out;
  write_observables_csv(out, {ObservableRecord{0.1, 1.0, 0.5, -0.0, 0.0, 2.0, 0.0}});
  const std::string s = out.str();
  CHECK(s.rfind("t,mass,energy,m_eps,n,X,xy\n", 0) == 0);
  CHECK(s.find("0.10000000000000001,1,0.5,") != std::string::npos);
}

}  // TEST_SUITE
