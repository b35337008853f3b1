#include "rotorwkb/finite_difference.hpp"

namespace rotorwkb::fd {

namespace {

template <class Kernel>
void for_each_line(const GridSpec& g, int axis, Kernel&& kernel) {
  const std::size_t s = g.stride(axis);
  const int n = g.points[axis];
  const std::size_t total = g.size();
  const std::size_t block = s * n;
  for (std::size_t outer = 0; outer < total; outer += block)
    for (std::size_t inner = 0; inner < s; ++inner) kernel(outer + inner, s, n);
}

}  // namespace

void derivative(const ScalarField& f, int axis, ScalarField& out) {
  const auto& g = f.grid;
  out.grid = g;
  out.values.resize(g.size());
  const double c = 1.0 / (12.0 * g.spacing(axis));
  const double* u = f.values.data();
  double* d = out.values.data();
  for_each_line(g, axis, [&](std::size_t b, std::size_t s, int n) {
    auto at = [&](int j) { return u[b + j * s]; };
    d[b] = c * (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4));
    d[b + s] = c * (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4));
    for (int j = 2; j < n - 2; ++j)
      d[b + j * s] = c * (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2));
    d[b + (n - 2) * s] =
        -c * (-3.0 * at(n - 1) - 10.0 * at(n - 2) + 18.0 * at(n - 3) - 6.0 * at(n - 4) + at(n - 5));
    d[b + (n - 1) * s] = -c * (-25.0 * at(n - 1) + 48.0 * at(n - 2) - 36.0 * at(n - 3) +
                               16.0 * at(n - 4) - 3.0 * at(n - 5));
  });
}

void second_derivative(const ScalarField& f, int axis, ScalarField& out) {
  const auto& g = f.grid;
  out.grid = g;
  out.values.resize(g.size());
  const double h = g.spacing(axis);
  const double c = 1.0 / (12.0 * h * h);
  const double* u = f.values.data();
  double* d = out.values.data();
  for_each_line(g, axis, [&](std::size_t b, std::size_t s, int n) {
    auto at = [&](int j) { return u[b + j * s]; };
    auto left0 = [&](auto v) {
      return c * (45.0 * v(0) - 154.0 * v(1) + 214.0 * v(2) - 156.0 * v(3) + 61.0 * v(4) - 10.0 * v(5));
    };
    auto left1 = [&](auto v) {
      return c * (10.0 * v(0) - 15.0 * v(1) - 4.0 * v(2) + 14.0 * v(3) - 6.0 * v(4) + v(5));
    };
    auto mirrored = [&](int j) { return at(n - 1 - j); };
    d[b] = left0(at);
    d[b + s] = left1(at);
    for (int j = 2; j < n - 2; ++j)
      d[b + j * s] =
          c * (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1) - at(j + 2));
    d[b + (n - 2) * s] = left1(mirrored);
    d[b + (n - 1) * s] = left0(mirrored);
  });
}

ScalarField derivative(const ScalarField& f, int axis) {
  ScalarField out;
  derivative(f, axis, out);
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  ScalarField out(f.grid), tmp;
  for (int a = 0; a < f.grid.dim; ++a) {
    second_derivative(f, a, tmp);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += tmp.values[i];
  }
  return out;
}

VectorField gradient(const ScalarField& f) {
  VectorField g;
  for (int a = 0; a < f.grid.dim; ++a) g.push_back(derivative(f, a));
  return g;
}

}  // namespace rotorwkb::fd
