#include "rotorwkb/observables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "rotorwkb/spectral.hpp"

namespace rotorwkb {

namespace {

// int conj(psi) x_perp . grad psi, spectral gradient.
cplx rotation_integral(const ComplexField& psi, const std::vector<ComplexField>& grad) {
  cplx s = 0.0;
  for_each_node(psi.grid, [&](std::size_t i, const Point& x) {
    const Point xp = perp(x);
    s += std::conj(psi.values[i]) * (xp[0] * grad[0].values[i] + xp[1] * grad[1].values[i]);
  });
  return s * psi.grid.cell_measure();
}

}  // namespace

RealQuadrature energy_detailed(const ComplexField& psi, const SimParams& params) {
  const auto grad = spectral_gradient(psi);
  const double eps = params.eps;
  double kinetic = 0.0, pot = 0.0, inter = 0.0;
  for_each_node(psi.grid, [&](std::size_t i, const Point& x) {
    double g2 = 0.0;
    for (const auto& g : grad) g2 += std::norm(g.values[i]);
    const double rho = std::norm(psi.values[i]);
    kinetic += g2;
    pot += eval_potential(params, x) * rho;
    inter += params.nonlinearity.G(rho);
  });
  const double dv = psi.grid.cell_measure();
  const cplx rot = cplx(0.0, eps * params.Omega) * rotation_integral(psi, grad);
  RealQuadrature out;
  out.value = (0.5 * eps * eps * kinetic + pot + inter) * dv + rot.real();
  out.imag_residue = rot.imag();
  return out;
}

double energy(const ComplexField& psi, const SimParams& params) {
  return energy_detailed(psi, params).value;
}

RealQuadrature angular_momentum_detailed(const ComplexField& psi, double eps) {
  const cplx m = cplx(0.0, eps) * rotation_integral(psi, spectral_gradient(psi));
  return {m.real(), m.imag()};
}

double angular_momentum(const ComplexField& psi, double eps) {
  return angular_momentum_detailed(psi, eps).value;
}

VectorField current(const ComplexField& psi, double eps) {
  const auto grad = spectral_gradient(psi);
  VectorField J;
  for (const auto& g : grad) {
    ScalarField c(psi.grid);
    for (std::size_t i = 0; i < c.size(); ++i)
      c.values[i] = eps * (std::conj(psi.values[i]) * g.values[i]).imag();
    J.push_back(std::move(c));
  }
  return J;
}

double limit_angular_momentum(const ScalarField& rho, const VectorField& v) {
  double s = 0.0;
  for_each_node(rho.grid, [&](std::size_t i, const Point& x) {
    const Point xp = perp(x);
    s += rho.values[i] * (xp[0] * v[0].values[i] + xp[1] * v[1].values[i]);
  });
  return -s * rho.grid.cell_measure();
}

namespace {

Moments moments_from(const GridSpec& g, const std::vector<double>& rho, const VectorField& J) {
  Moments m;
  for_each_node(g, [&](std::size_t i, const Point& x) {
    double xj = 0.0, r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      xj += x[a] * J[a].values[i];
      r2 += x[a] * x[a];
    }
    m.n += xj;
    m.X += r2 * rho[i];
    m.xy += x[0] * x[1] * rho[i];
  });
  const double dv = g.cell_measure();
  m.n *= dv;
  m.X *= dv;
  m.xy *= dv;
  return m;
}

}  // namespace

Moments moments(const ComplexField& psi, double eps) {
  std::vector<double> rho(psi.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.values[i]);
  return moments_from(psi.grid, rho, current(psi, eps));
}

Moments moments(const ScalarField& rho, const VectorField& v) {
  VectorField J = v;
  for (auto& c : J)
    for (std::size_t i = 0; i < c.size(); ++i) c.values[i] *= rho.values[i];
  return moments_from(rho.grid, rho.values, J);
}

ObservableRecord observe(const WaveField& w) {
  ObservableRecord r;
  r.t = w.t;
  r.mass = mass(w.psi);
  r.energy = energy(w.psi, w.params);
  r.m_eps = angular_momentum(w.psi, w.params.eps);
  const auto mo = moments(w.psi, w.params.eps);
  r.n = mo.n;
  r.X = mo.X;
  r.xy = mo.xy;
  return r;
}

MomentODEParams make_moment_params(const SimParams& params, const ObservableRecord& initial) {
  MomentODEParams p;
  p.Omega = params.Omega;
  p.omega1 = params.omega[0];
  p.omega2 = params.omega[1];
  p.E0 = initial.energy;
  p.m0 = initial.m_eps;
  p.n0 = initial.n;
  p.X0 = initial.X;
  const double w1 = p.omega1 * p.omega1, w2 = p.omega2 * p.omega2;
  p.omega_perp_sq = 0.5 * (w1 + w2);
  p.delta = (w1 + w2) > 0.0 ? (w1 - w2) / (w1 + w2) : 0.0;
  return p;
}

std::pair<double, double> moment_ode_rhs(double m, double n, double X, double xy, const MomentODEParams& p) {
  const double mdot = p.Omega * n + (p.omega1 * p.omega1 - p.omega2 * p.omega2) * xy;
  const double ndot = 2.0 * (p.E0 - p.Omega * m) - 2.0 * p.omega_perp_sq * X;
  return {mdot, ndot};
}

std::vector<MomentSample> integrate_moment_ode(const MomentODEParams& p, double T, double dt) {
  if (!(dt > 0.0) || T < 0.0) throw std::invalid_argument("integrate_moment_ode: need dt > 0, T >= 0");
  struct Y {
    double m, n, X;
  };
  auto rhs = [&](const Y& y) {
    const auto [md, nd] = moment_ode_rhs(y.m, y.n, y.X, 0.0, p);
    return Y{md, nd, 2.0 * y.n};
  };
  auto axpy = [](const Y& a, double h, const Y& k) { return Y{a.m + h * k.m, a.n + h * k.n, a.X + h * k.X}; };

  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;
  std::vector<MomentSample> out;
  out.reserve(steps + 1);
  Y y{p.m0, p.n0, p.X0};
  out.push_back({0.0, y.m, y.n, y.X});
  for (std::size_t s = 1; s <= steps; ++s) {
    const Y k1 = rhs(y);
    const Y k2 = rhs(axpy(y, 0.5 * h, k1));
    const Y k3 = rhs(axpy(y, 0.5 * h, k2));
    const Y k4 = rhs(axpy(y, h, k3));
    y.m += h / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
    y.n += h / 6.0 * (k1.n + 2.0 * k2.n + 2.0 * k3.n + k4.n);
    y.X += h / 6.0 * (k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X);
    out.push_back({static_cast<double>(s) * h, y.m, y.n, y.X});
  }
  return out;
}

double isotropic_particular_value(const MomentODEParams& p) {
  if (p.omega1 != p.omega2) throw std::invalid_argument("isotropic_closed_form: trap is anisotropic");
  const double w2 = p.omega1 * p.omega1;
  const double k2 = 4.0 * w2 + 2.0 * p.Omega * p.Omega;
  if (!(k2 > 0.0)) throw std::invalid_argument("isotropic_closed_form: zero frequency");
  return (2.0 * p.Omega * p.E0 + 4.0 * w2 * p.m0 - 2.0 * p.Omega * w2 * p.X0) / k2;
}

double isotropic_closed_form(double t, const MomentODEParams& p) {
  const double mp = isotropic_particular_value(p);
  const double k = std::sqrt(4.0 * p.omega1 * p.omega1 + 2.0 * p.Omega * p.Omega);
  const double c1 = p.m0 - mp;
  const double c2 = p.Omega * p.n0 / k;
  return c1 * std::cos(k * t) + c2 * std::sin(k * t) + mp;
}

std::vector<double> semiclassical_am_relation(const std::vector<ObservableRecord>& records,
                                              double Omega) {
  std::vector<double> r;
  if (records.empty()) return r;
  const auto& r0 = records.front();
  r.reserve(records.size());
  for (const auto& rec : records) r.push_back(rec.m_eps - r0.m_eps - 0.5 * Omega * (rec.X - r0.X));
  return r;
}

double dominant_frequency(const std::vector<double>& values, double sample_dt) {
  const std::size_t n = values.size();
  if (n < 8 || !(sample_dt > 0.0)) throw std::invalid_argument("dominant_frequency: need >= 8 samples");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  std::size_t padded = 1;
  while (padded < 16 * n) padded <<= 1;
  std::vector<cplx> buf(padded, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / (n - 1));
    buf[i] = w * (values[i] - mean);
  }
  fft_1d(buf);
  std::size_t best = 1;
  for (std::size_t k = 1; k < padded / 2; ++k)
    if (std::abs(buf[k]) > std::abs(buf[best])) best = k;
  double shift = 0.0;
  if (best + 1 < padded / 2) {
    const double a = std::abs(buf[best - 1]), b = std::abs(buf[best]), c = std::abs(buf[best + 1]);
    const double den = a - 2.0 * b + c;
    if (den != 0.0) shift = 0.5 * (a - c) / den;
  }
  return 2.0 * std::numbers::pi * (static_cast<double>(best) + shift) /
         (static_cast<double>(padded) * sample_dt);
}

void write_observables_csv(std::ostream& out, const std::vector<ObservableRecord>& rows) {
  auto put = [&](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc()) throw std::runtime_error("write_observables_csv: formatting failed");
    out.write(buf, ptr - buf);
  };
  out << "t,mass,energy,m_eps,n,X,xy\n";
  for (const auto& r : rows) {
    put(r.t), out << ',';
    put(r.mass), out << ',';
    put(r.energy), out << ',';
    put(r.m_eps), out << ',';
    put(r.n), out << ',';
    put(r.X), out << ',';
    put(r.xy), out << '\n';
  }
}

}  // namespace rotorwkb
