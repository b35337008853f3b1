#include "rotorwkb/grid.hpp"

#include <cmath>

namespace rotorwkb {

GridSpec GridSpec::cube(int dim, int n, double half_extent) {
  GridSpec g;
  g.dim = dim;
  for (int a = 0; a < dim && a < 3; ++a) {
    g.points[a] = n;
    g.half_extent[a] = half_extent;
  }
  return g;
}

std::size_t GridSpec::size() const {
  return static_cast<std::size_t>(points[0]) * points[1] * points[2];
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int a = 2; a > axis; --a) s *= static_cast<std::size_t>(points[a]);
  return s;
}

double GridSpec::cell_measure() const {
  double m = 1.0;
  for (int a = 0; a < dim; ++a) m *= spacing(a);
  return m;
}

double GridSpec::domain_measure() const {
  double m = 1.0;
  for (int a = 0; a < dim; ++a) m *= 2.0 * half_extent[a];
  return m;
}

void GridSpec::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("grid dim must be 2 or 3");
  for (int a = 0; a < 3; ++a) {
    const std::string axis = std::to_string(a + 1);
    if (a >= dim) {
      if (points[a] != 1) throw std::invalid_argument("unused axis " + axis + " must have one point");
      continue;
    }
    const int n = points[a];
    if (n < 8 || (n & (n - 1)) != 0)
      throw std::invalid_argument("axis " + axis + ": N must be a power of two >= 8");
    if (!(half_extent[a] > 0.0) || !std::isfinite(half_extent[a]))
      throw std::invalid_argument("axis " + axis + ": half extent L must be positive");
  }
}

std::array<int, 3> GridSpec::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  idx[2] = static_cast<int>(flat % points[2]);
  flat /= points[2];
  idx[1] = static_cast<int>(flat % points[1]);
  idx[0] = static_cast<int>(flat / points[1]);
  return idx;
}

Point GridSpec::coords(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) x[a] = node(a, idx[a]);
  return x;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string("grid mismatch in ") + what);
}

bool all_finite(const ComplexField& f) {
  for (const auto& z : f.values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

bool all_finite(const ScalarField& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return false;
  return true;
}

double boundary_max(const ComplexField& f) {
  const auto& g = f.grid;
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto idx = g.unflatten(i);
    bool edge = false;
    for (int a = 0; a < g.dim; ++a)
      if (idx[a] == 0 || idx[a] == g.points[a] - 1) edge = true;
    if (edge) m = std::max(m, std::abs(f.values[i]));
  }
  return m;
}

}  // namespace rotorwkb
