#pragma once

#include <span>

#include "rotorwkb/grid.hpp"
#include "rotorwkb/params.hpp"

namespace rotorwkb {

/// Wave function psi^eps sampled on the periodic grid at time t.
struct WaveField {
  ComplexField psi;
  double t = 0.0;
  SimParams params;

  const GridSpec& grid() const { return psi.grid; }
};

/// psi = a exp(i Phi / eps), pointwise.
ComplexField wkb_assemble(const ComplexField& amplitude, const ScalarField& phase, double eps);

/// r^|m| exp(-r^2 / (2 width^2)) exp(i m theta) in the (x1, x2) plane,
/// normalized to unit mass. Requires a two-dimensional grid.
ComplexField make_vortex_init(const GridSpec& grid, int winding, double width);

/// exp(-|x - center|^2 / (2 width^2)), normalized to unit mass.
ComplexField make_gaussian(const GridSpec& grid, const Point& center, double width);

/// Cell-measure weighted sum of |f|^2.
double mass(const ComplexField& f);
double l2_norm(const ComplexField& f);
double l2_norm(const ScalarField& f);

/// Spectral H^s norm (sum_k (1 + |k|^2)^s |f_k|^2 * cell measure)^{1/2}
/// of a multi-component field. With `weighted`, returns
/// ||U||_s + || |x| U ||_{s-1}.
double sobolev_norm(std::span<const ComplexField> components, double s, bool weighted = false);
double sobolev_norm(const ComplexField& field, double s, bool weighted = false);
double sobolev_norm(std::span<const ScalarField> components, double s, bool weighted = false);

ComplexField to_complex(const ScalarField& f);
ScalarField real_part(const ComplexField& f);
ScalarField imag_part(const ComplexField& f);

}  // namespace rotorwkb
