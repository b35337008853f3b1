#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rotorwkb/errors.hpp"
#include "rotorwkb/spectral.hpp"
#include "rotorwkb/wavefield.hpp"

namespace rotorwkb::nls {

using rotorwkb::NumericalAbort;

/// Precomputed operators for the rotating NLS
///
///   i eps psi_t = -eps^2/2 Lap psi + V psi + f(|psi|^2) psi + i eps Omega x_perp . grad psi
///
/// split into three exactly solvable pieces:
///   K1: -eps^2/2 d11 + i eps Omega x2 d1   (diagonal in k1 for each x2 row)
///   K2: -eps^2/2 d22 - i eps Omega x1 d2   (diagonal in k2 for each x1 column)
///   P : V + f(|psi|^2)                     (pointwise phase)
/// In d = 3 the x3 kinetic factor is attached to K1. A negative dt runs
/// the scheme backward in time.
class SplitStepPlan {
 public:
  SplitStepPlan(const GridSpec& grid, const SimParams& params, double dt);

  const GridSpec& grid() const { return grid_; }
  const SimParams& params() const { return params_; }
  double dt() const { return dt_; }

  // In-place substeps of duration h. Tables exist for the durations used by
  // the Strang step; other durations are evaluated on the fly.
  void kinetic_rotation_axis1(std::vector<cplx>& psi, double h) const;
  void kinetic_rotation_axis2(std::vector<cplx>& psi, double h) const;
  void potential_nonlinear(std::vector<cplx>& psi, double h) const;

  /// P(dt/2) K1(dt/2) K2(dt) K1(dt/2) P(dt/2).
  void strang(std::vector<cplx>& psi) const;

 private:
  struct PhaseTable {
    double h = 0.0;
    std::vector<cplx> mult;
  };

  std::vector<cplx> axis1_multipliers(double h) const;
  std::vector<cplx> axis2_multipliers(double h) const;
  std::vector<cplx> axis3_multipliers(double h) const;
  std::vector<cplx> potential_multipliers(double h) const;

  GridSpec grid_;
  SimParams params_;
  double dt_;
  GridFft fft1_, fft2_;
  std::optional<GridFft> fft3_;
  PhaseTable k1_, k2_, k3_, pot_;
};

WaveField step_kinetic_rotation_axis1(const SplitStepPlan& plan, const WaveField& psi, double h);
WaveField step_kinetic_rotation_axis2(const SplitStepPlan& plan, const WaveField& psi, double h);
WaveField step_potential_nonlinear(const SplitStepPlan& plan, const WaveField& psi, double h);
WaveField strang_step(const SplitStepPlan& plan, const WaveField& psi);

using Observer = std::function<void(const WaveField&, std::size_t step)>;

struct EvolveOptions {
  std::size_t stride = 1;  ///< observer called every `stride` steps, plus t = 0 and the final time
  Observer observer;
};

/// Repeated Strang steps from psi0.t to psi0.t + T. When dt does not divide
/// T, the last step is shortened. T and dt must have the same sign.
WaveField evolve_nls(const WaveField& psi0, double T, double dt, const EvolveOptions& opts = {});

/// 1e-3 * max(1, 1 / max omega).
double default_dt(const SimParams& params);

}  // namespace rotorwkb::nls
