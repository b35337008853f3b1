#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rotorwkb {

using cplx = std::complex<double>;
using Point = std::array<double, 3>;

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform periodic box [-L, L)^d with N nodes per axis, row-major storage
/// (axis 0 varies slowest). Unused axes have one point and zero extent.
struct GridSpec {
  int dim = 2;
  std::array<int, 3> points{1, 1, 1};
  std::array<double, 3> half_extent{0.0, 0.0, 0.0};

  static GridSpec cube(int dim, int n, double half_extent);

  double spacing(int axis) const { return 2.0 * half_extent[axis] / points[axis]; }
  double node(int axis, int j) const { return -half_extent[axis] + j * spacing(axis); }
  std::size_t size() const;
  std::size_t stride(int axis) const;
  double cell_measure() const;
  double domain_measure() const;

  /// Throws std::invalid_argument naming the offending axis.
  void validate() const;

  /// Multi-index of a flat position.
  std::array<int, 3> unflatten(std::size_t flat) const;
  Point coords(std::size_t flat) const;

  bool operator==(const GridSpec&) const = default;
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

template <class T>
struct GridFunction {
  GridSpec grid;
  std::vector<T> values;

  GridFunction() = default;
  explicit GridFunction(const GridSpec& g, T fill = T{}) : grid(g), values(g.size(), fill) {}

  std::size_t size() const { return values.size(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }
};

using ScalarField = GridFunction<double>;
using ComplexField = GridFunction<cplx>;
/// d real components on a common grid.
using VectorField = std::vector<ScalarField>;

/// Calls fn(flat_index, x) for every node in storage order.
template <class Fn>
void for_each_node(const GridSpec& g, Fn&& fn) {
  const int n0 = g.points[0], n1 = g.points[1], n2 = g.points[2];
  std::size_t flat = 0;
  Point x{0.0, 0.0, 0.0};
  for (int i = 0; i < n0; ++i) {
    x[0] = g.node(0, i);
    for (int j = 0; j < n1; ++j) {
      x[1] = g.dim > 1 ? g.node(1, j) : 0.0;
      for (int k = 0; k < n2; ++k, ++flat) {
        x[2] = g.dim > 2 ? g.node(2, k) : 0.0;
        fn(flat, x);
      }
    }
  }
}

template <class T, class Fn>
GridFunction<T> sample(const GridSpec& g, Fn&& fn) {
  GridFunction<T> out(g);
  for_each_node(g, [&](std::size_t i, const Point& x) { out.values[i] = fn(x); });
  return out;
}

bool all_finite(const ComplexField& f);
bool all_finite(const ScalarField& f);

/// Largest |value| over nodes on the outer face of the box.
double boundary_max(const ComplexField& f);

}  // namespace rotorwkb
