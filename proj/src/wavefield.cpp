#include "rotorwkb/wavefield.hpp"

#include <cmath>
#include <stdexcept>

#include "rotorwkb/spectral.hpp"

namespace rotorwkb {

ComplexField wkb_assemble(const ComplexField& amplitude, const ScalarField& phase, double eps) {
  require_same_grid(amplitude.grid, phase.grid, "wkb_assemble");
  if (!(eps > 0.0)) throw std::invalid_argument("wkb_assemble: eps must be positive");
  ComplexField out(amplitude.grid);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = amplitude.values[i] * std::polar(1.0, phase.values[i] / eps);
  return out;
}

namespace {

void normalize(ComplexField& f) {
  const double m = mass(f);
  if (!(m > 0.0)) throw std::runtime_error("cannot normalize a vanishing field");
  const double s = 1.0 / std::sqrt(m);
  for (auto& z : f.values) z *= s;
}

}  // namespace

ComplexField make_vortex_init(const GridSpec& grid, int winding, double width) {
  if (grid.dim != 2) throw std::invalid_argument("make_vortex_init: vortex states need d = 2");
  if (!(width > 0.0)) throw std::invalid_argument("make_vortex_init: width must be positive");
  const int m = std::abs(winding);
  auto a = sample<cplx>(grid, [&](const Point& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    // (x1 + i x2)^m = r^m e^{i m theta}; conjugate for negative winding.
    cplx z = std::pow(cplx(x[0], x[1]), m);
    if (winding < 0) z = std::conj(z);
    return z * std::exp(-r2 / (2.0 * width * width));
  });
  normalize(a);
  return a;
}

ComplexField make_gaussian(const GridSpec& grid, const Point& center, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("make_gaussian: width must be positive");
  auto a = sample<cplx>(grid, [&](const Point& x) {
    double r2 = 0.0;
    for (int j = 0; j < grid.dim; ++j) r2 += (x[j] - center[j]) * (x[j] - center[j]);
    return cplx(std::exp(-r2 / (2.0 * width * width)), 0.0);
  });
  normalize(a);
  return a;
}

double mass(const ComplexField& f) {
  double s = 0.0;
  for (const auto& z : f.values) s += std::norm(z);
  return s * f.grid.cell_measure();
}

double l2_norm(const ComplexField& f) { return std::sqrt(mass(f)); }

double l2_norm(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s * f.grid.cell_measure());
}

namespace {

double sobolev_sq(const ComplexField& f, double s) {
  const auto& g = f.grid;
  GridFft fft(g);
  std::vector<cplx> hat = f.values;
  fft.forward(hat);
  std::vector<std::vector<double>> k;
  for (int a = 0; a < g.dim; ++a) k.push_back(wavenumbers(g, a));
  double sum = 0.0;
  for (std::size_t i = 0; i < hat.size(); ++i) {
    const auto idx = g.unflatten(i);
    double k2 = 0.0;
    for (int a = 0; a < g.dim; ++a) k2 += k[a][idx[a]] * k[a][idx[a]];
    sum += std::pow(1.0 + k2, s) * std::norm(hat[i]);
  }
  // Parseval for the unnormalized transform: sum |f_j|^2 = sum |f_k|^2 / N.
  return sum * g.cell_measure() / static_cast<double>(g.size());
}

ComplexField weight_by_radius(const ComplexField& f) {
  ComplexField out = f;
  for_each_node(f.grid, [&](std::size_t i, const Point& x) {
    out.values[i] *= std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  });
  return out;
}

}  // namespace

double sobolev_norm(std::span<const ComplexField> components, double s, bool weighted) {
  if (s < 0.0) throw std::invalid_argument("sobolev_norm: s must be nonnegative");
  double plain = 0.0, moment = 0.0;
  for (const auto& c : components) {
    plain += sobolev_sq(c, s);
    if (weighted) moment += sobolev_sq(weight_by_radius(c), s - 1.0);
  }
  return weighted ? std::sqrt(plain) + std::sqrt(moment) : std::sqrt(plain);
}

double sobolev_norm(const ComplexField& field, double s, bool weighted) {
  return sobolev_norm(std::span<const ComplexField>(&field, 1), s, weighted);
}

double sobolev_norm(std::span<const ScalarField> components, double s, bool weighted) {
  std::vector<ComplexField> c;
  c.reserve(components.size());
  for (const auto& f : components) c.push_back(to_complex(f));
  return sobolev_norm(std::span<const ComplexField>(c), s, weighted);
}

ComplexField to_complex(const ScalarField& f) {
  ComplexField out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = f.values[i];
  return out;
}

ScalarField real_part(const ComplexField& f) {
  ScalarField out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = f.values[i].real();
  return out;
}

ScalarField imag_part(const ComplexField& f) {
  ScalarField out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = f.values[i].imag();
  return out;
}

}  // namespace rotorwkb
