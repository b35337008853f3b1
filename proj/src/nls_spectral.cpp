#include "rotorwkb/nls_spectral.hpp"

#include <cmath>

namespace rotorwkb::nls {

SplitStepPlan::SplitStepPlan(const GridSpec& grid, const SimParams& params, double dt)
    : grid_(grid), params_(params), dt_(dt), fft1_(grid, 0), fft2_(grid, 1) {
  grid.validate();
  params.validate();
  if (grid.dim != params.dim) throw std::invalid_argument("SplitStepPlan: grid/params dim mismatch");
  if (!std::isfinite(dt) || dt == 0.0) throw std::invalid_argument("SplitStepPlan: dt must be nonzero");
  if (grid.dim == 3) fft3_.emplace(grid, 2);
  k1_ = {0.5 * dt, axis1_multipliers(0.5 * dt)};
  k2_ = {dt, axis2_multipliers(dt)};
  if (grid.dim == 3) k3_ = {0.5 * dt, axis3_multipliers(0.5 * dt)};
  pot_ = {0.5 * dt, potential_multipliers(0.5 * dt)};
}

// exp(-i h (eps k1^2 / 2 - Omega x2 k1)), indexed [k1 index * n1 + x2 index].
std::vector<cplx> SplitStepPlan::axis1_multipliers(double h) const {
  const int n0 = grid_.points[0], n1 = grid_.points[1];
  const auto k = wavenumbers(grid_, 0);
  std::vector<cplx> m(static_cast<std::size_t>(n0) * n1);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      const double x2 = grid_.node(1, j);
      const double w = params_.eps * k[i] * k[i] / 2.0 - params_.Omega * x2 * k[i];
      m[static_cast<std::size_t>(i) * n1 + j] = std::polar(1.0, -h * w);
    }
  return m;
}

// exp(-i h (eps k2^2 / 2 + Omega x1 k2)), indexed [x1 index * n1 + k2 index].
std::vector<cplx> SplitStepPlan::axis2_multipliers(double h) const {
  const int n0 = grid_.points[0], n1 = grid_.points[1];
  const auto k = wavenumbers(grid_, 1);
  std::vector<cplx> m(static_cast<std::size_t>(n0) * n1);
  for (int i = 0; i < n0; ++i) {
    const double x1 = grid_.node(0, i);
    for (int j = 0; j < n1; ++j) {
      const double w = params_.eps * k[j] * k[j] / 2.0 + params_.Omega * x1 * k[j];
      m[static_cast<std::size_t>(i) * n1 + j] = std::polar(1.0, -h * w);
    }
  }
  return m;
}

std::vector<cplx> SplitStepPlan::axis3_multipliers(double h) const {
  const auto k = wavenumbers(grid_, 2);
  std::vector<cplx> m(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) m[j] = std::polar(1.0, -h * params_.eps * k[j] * k[j] / 2.0);
  return m;
}

std::vector<cplx> SplitStepPlan::potential_multipliers(double h) const {
  std::vector<cplx> m(grid_.size());
  for_each_node(grid_, [&](std::size_t i, const Point& x) {
    m[i] = std::polar(1.0, -h * eval_potential(params_, x) / params_.eps);
  });
  return m;
}

void SplitStepPlan::kinetic_rotation_axis1(std::vector<cplx>& psi, double h) const {
  if (h == 0.0) return;
  const auto table = (h == k1_.h) ? std::vector<cplx>{} : axis1_multipliers(h);
  const auto& m = table.empty() ? k1_.mult : table;
  fft1_.forward(psi);
  const std::size_t n2 = grid_.points[2];
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= m[i / n2];
  fft1_.backward(psi);
  if (fft3_) {
    const auto t3 = (h == k3_.h) ? std::vector<cplx>{} : axis3_multipliers(h);
    const auto& m3 = t3.empty() ? k3_.mult : t3;
    fft3_->forward(psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= m3[i % n2];
    fft3_->backward(psi);
  }
}

void SplitStepPlan::kinetic_rotation_axis2(std::vector<cplx>& psi, double h) const {
  if (h == 0.0) return;
  const auto table = (h == k2_.h) ? std::vector<cplx>{} : axis2_multipliers(h);
  const auto& m = table.empty() ? k2_.mult : table;
  fft2_.forward(psi);
  const std::size_t n2 = grid_.points[2];
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= m[i / n2];
  fft2_.backward(psi);
}

void SplitStepPlan::potential_nonlinear(std::vector<cplx>& psi, double h) const {
  if (h == 0.0) return;
  const auto table = (h == pot_.h) ? std::vector<cplx>{} : potential_multipliers(h);
  const auto& m = table.empty() ? pot_.mult : table;
  const auto& nl = params_.nonlinearity;
  const double scale = -h / params_.eps;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = std::norm(psi[i]);
    psi[i] *= m[i] * std::polar(1.0, scale * nl.f(rho));
  }
}

void SplitStepPlan::strang(std::vector<cplx>& psi) const {
  potential_nonlinear(psi, 0.5 * dt_);
  kinetic_rotation_axis1(psi, 0.5 * dt_);
  kinetic_rotation_axis2(psi, dt_);
  kinetic_rotation_axis1(psi, 0.5 * dt_);
  potential_nonlinear(psi, 0.5 * dt_);
}

namespace {

void check_plan(const SplitStepPlan& plan, const WaveField& psi) {
  require_same_grid(plan.grid(), psi.grid(), "split-step substep");
}

}  // namespace

WaveField step_kinetic_rotation_axis1(const SplitStepPlan& plan, const WaveField& psi, double h) {
  check_plan(plan, psi);
  WaveField out = psi;
  plan.kinetic_rotation_axis1(out.psi.values, h);
  out.t += h;
  return out;
}

WaveField step_kinetic_rotation_axis2(const SplitStepPlan& plan, const WaveField& psi, double h) {
  check_plan(plan, psi);
  WaveField out = psi;
  plan.kinetic_rotation_axis2(out.psi.values, h);
  out.t += h;
  return out;
}

WaveField step_potential_nonlinear(const SplitStepPlan& plan, const WaveField& psi, double h) {
  check_plan(plan, psi);
  WaveField out = psi;
  plan.potential_nonlinear(out.psi.values, h);
  out.t += h;
  return out;
}

WaveField strang_step(const SplitStepPlan& plan, const WaveField& psi) {
  check_plan(plan, psi);
  WaveField out = psi;
  plan.strang(out.psi.values);
  out.t += plan.dt();
  return out;
}

WaveField evolve_nls(const WaveField& psi0, double T, double dt, const EvolveOptions& opts) {
  if (!std::isfinite(T) || !std::isfinite(dt) || dt == 0.0)
    throw std::invalid_argument("evolve_nls: T and dt must be finite, dt nonzero");
  if (T != 0.0 && (T > 0.0) != (dt > 0.0))
    throw std::invalid_argument("evolve_nls: T and dt must have the same sign");
  const std::size_t stride = std::max<std::size_t>(1, opts.stride);

  WaveField psi = psi0;
  if (opts.observer) opts.observer(psi, 0);
  if (T == 0.0) return psi;

  const double ratio = T / dt;
  auto full = static_cast<std::size_t>(std::floor(ratio + 1e-9));
  double rest = T - static_cast<double>(full) * dt;
  if (std::abs(rest) <= 1e-12 * std::max(1.0, std::abs(T))) rest = 0.0;
  const std::size_t total = full + (rest != 0.0 ? 1 : 0);

  const SplitStepPlan plan(psi.grid(), psi.params, dt);
  for (std::size_t step = 1; step <= total; ++step) {
    if (step <= full) {
      plan.strang(psi.psi.values);
      psi.t = psi0.t + static_cast<double>(step) * dt;
    } else {
      const SplitStepPlan tail(psi.grid(), psi.params, rest);
      tail.strang(psi.psi.values);
      psi.t = psi0.t + T;
    }
    if (!all_finite(psi.psi))
      throw NumericalAbort("evolve_nls: non-finite value at step " + std::to_string(step), step);
    if (opts.observer && (step % stride == 0 || step == total)) opts.observer(psi, step);
  }
  return psi;
}

double default_dt(const SimParams& params) {
  const double w = params.max_omega();
  return 1e-3 * std::max(1.0, w > 0.0 ? 1.0 / w : 1.0);
}

}  // namespace rotorwkb::nls
