#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "rotorwkb/wavefield.hpp"

namespace rotorwkb {

struct ObservableRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double m_eps = 0.0;
  double n = 0.0;
  double X = 0.0;
  double xy = 0.0;
};

/// A quadrature whose exact value is real, with the discarded imaginary part.
struct RealQuadrature {
  double value = 0.0;
  double imag_residue = 0.0;
};

/// int eps^2/2 |grad psi|^2 + V |psi|^2 + G(|psi|^2) + Re(i eps Omega conj(psi) x_perp . grad psi).
/// Gradients are spectral. imag_residue is the imaginary part of the rotation term.
RealQuadrature energy_detailed(const ComplexField& psi, const SimParams& params);
double energy(const ComplexField& psi, const SimParams& params);

/// m^eps = i eps int conj(psi) x_perp . grad psi.
RealQuadrature angular_momentum_detailed(const ComplexField& psi, double eps);
double angular_momentum(const ComplexField& psi, double eps);

/// Current J = eps Im(conj(psi) grad psi), spectral gradient.
VectorField current(const ComplexField& psi, double eps);

/// m = -int rho x_perp . v.
double limit_angular_momentum(const ScalarField& rho, const VectorField& v);

struct Moments {
  double n = 0.0;   ///< int x . J
  double X = 0.0;   ///< int |x|^2 rho
  double xy = 0.0;  ///< int x1 x2 rho
};

Moments moments(const ComplexField& psi, double eps);
/// Hydrodynamic version, J = rho v.
Moments moments(const ScalarField& rho, const VectorField& v);

ObservableRecord observe(const WaveField& psi);

struct MomentODEParams {
  double Omega = 0.0;
  double omega1 = 1.0, omega2 = 1.0;
  double E0 = 0.0, m0 = 0.0, n0 = 0.0, X0 = 0.0;
  double delta = 0.0;          ///< (w1^2 - w2^2) / (w1^2 + w2^2)
  double omega_perp_sq = 1.0;  ///< (w1^2 + w2^2) / 2
};

MomentODEParams make_moment_params(const SimParams& params, const ObservableRecord& initial);

/// (mdot, ndot) with
///   mdot = Omega n + (w1^2 - w2^2) xy
///   ndot = 2 (E0 - Omega m) - 2 omega_perp^2 X
/// The trap term int |diag(omega) x|^2 rho is written through X, which is
/// exact for isotropic traps.
std::pair<double, double> moment_ode_rhs(double m, double n, double X, double xy, const MomentODEParams& p);

/// Closed (m, n, X) system with xy = 0 integrated by classical RK4.
struct MomentSample {
  double t, m, n, X;
};
std::vector<MomentSample> integrate_moment_ode(const MomentODEParams& p, double T, double dt);

/// m(t) = C1 cos(kt) + C2 sin(kt) + m_p, k = sqrt(4 w^2 + 2 Omega^2).
/// Throws std::invalid_argument for anisotropic traps.
double isotropic_closed_form(double t, const MomentODEParams& p);
double isotropic_particular_value(const MomentODEParams& p);

/// m^eps(t) - m(0) - Omega/2 (X(t) - X(0)) for each record.
std::vector<double> semiclassical_am_relation(const std::vector<ObservableRecord>& records,
                                              double Omega);

/// Angular frequency of the largest spectral peak of a uniformly sampled
/// series (mean removed, Hann window, zero padding, parabolic refinement).
double dominant_frequency(const std::vector<double>& values, double sample_dt);

/// Header "t,mass,energy,m_eps,n,X,xy", 17 significant digits.
void write_observables_csv(std::ostream& out, const std::vector<ObservableRecord>& rows);

}  // namespace rotorwkb
