#pragma once

#include "rotorwkb/grid.hpp"

namespace rotorwkb::fd {

// Fourth-order centered differences in the interior with fourth-order
// one-sided closures on the two outermost nodes of each line. The closures
// keep linearly growing fields (drifts, total velocities) exact up to
// roundoff at the box faces, where a periodic wrap would see a jump.

void derivative(const ScalarField& f, int axis, ScalarField& out);
void second_derivative(const ScalarField& f, int axis, ScalarField& out);

ScalarField derivative(const ScalarField& f, int axis);
ScalarField laplacian(const ScalarField& f);
VectorField gradient(const ScalarField& f);

}  // namespace rotorwkb::fd
