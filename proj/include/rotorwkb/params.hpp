#pragma once

#include <array>
#include <string>
#include <string_view>

#include "rotorwkb/grid.hpp"

namespace rotorwkb {

/// Local nonlinearity f(rho) together with f' and the energy-density
/// primitive G (G' = f, G(0) = 0).
class Nonlinearity {
 public:
  enum class Kind { cubic, none };

  Nonlinearity() = default;
  explicit Nonlinearity(Kind kind, double coupling = 1.0) : kind_(kind), coupling_(coupling) {}

  static Nonlinearity cubic(double coupling = 1.0) { return Nonlinearity(Kind::cubic, coupling); }
  static Nonlinearity none() { return Nonlinearity(Kind::none, 0.0); }
  /// Accepts "cubic" or "none".
  static Nonlinearity parse(std::string_view name);

  double f(double rho) const { return kind_ == Kind::cubic ? coupling_ * rho : 0.0; }
  double fprime(double /*rho*/) const { return kind_ == Kind::cubic ? coupling_ : 0.0; }
  double G(double rho) const { return kind_ == Kind::cubic ? 0.5 * coupling_ * rho * rho : 0.0; }

  Kind kind() const { return kind_; }
  double coupling() const { return coupling_; }
  std::string name() const { return kind_ == Kind::cubic ? "cubic" : "none"; }

  bool operator==(const Nonlinearity&) const = default;

 private:
  Kind kind_ = Kind::cubic;
  double coupling_ = 1.0;
};

struct SimParams {
  double eps = 0.25;
  double Omega = 0.0;
  std::array<double, 3> omega{1.0, 1.0, 1.0};
  int dim = 2;
  Nonlinearity nonlinearity = Nonlinearity::cubic();

  /// eps > 0, Omega >= 0, omega_j >= 0, dim in {2, 3}. Zero trap
  /// frequencies are accepted so that free (V = 0) problems can be posed.
  void validate() const;

  double max_omega() const;
  /// In-plane isotropy omega_1 == omega_2 (the rotation plane).
  bool isotropic() const;

  bool operator==(const SimParams&) const = default;
};

/// Anisotropic harmonic trap V(x) = 1/2 sum_j omega_j^2 x_j^2.
double eval_potential(const SimParams& p, const Point& x);
Point potential_gradient(const SimParams& p, const Point& x);

/// x_perp = J x with J the planar rotation generator: (x2, -x1, 0).
inline Point perp(const Point& x) { return {x[1], -x[0], 0.0}; }

}  // namespace rotorwkb
