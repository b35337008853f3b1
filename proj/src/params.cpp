#include "rotorwkb/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rotorwkb {

Nonlinearity Nonlinearity::parse(std::string_view name) {
  if (name == "cubic") return cubic();
  if (name == "none") return none();
  throw std::invalid_argument("unknown nonlinearity '" + std::string(name) + "'");
}

void SimParams::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
  if (!(Omega >= 0.0) || !std::isfinite(Omega)) throw std::invalid_argument("Omega must be nonnegative");
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  for (int j = 0; j < dim; ++j)
    if (!(omega[j] >= 0.0) || !std::isfinite(omega[j]))
      throw std::invalid_argument("omega components must be nonnegative");
}

double SimParams::max_omega() const {
  double m = 0.0;
  for (int j = 0; j < dim; ++j) m = std::max(m, omega[j]);
  return m;
}

bool SimParams::isotropic() const { return omega[0] == omega[1]; }

double eval_potential(const SimParams& p, const Point& x) {
  double v = 0.0;
  for (int j = 0; j < p.dim; ++j) v += p.omega[j] * p.omega[j] * x[j] * x[j];
  return 0.5 * v;
}

Point potential_gradient(const SimParams& p, const Point& x) {
  Point g{0.0, 0.0, 0.0};
  for (int j = 0; j < p.dim; ++j) g[j] = p.omega[j] * p.omega[j] * x[j];
  return g;
}

}  // namespace rotorwkb
