#include "rotorwkb/wkb_hydro.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rotorwkb/finite_difference.hpp"
#include "rotorwkb/spectral.hpp"

namespace rotorwkb::wkb {

using rays::Mat;
using rays::Vec;

double DriftSource::max_speed(double t, const GridSpec& g) const {
  const auto d = drift(t, g);
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (const auto& c : d.w) s += c.values[i] * c.values[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

namespace {

Vec to_vec(const Point& x, int dim) {
  Vec v(dim);
  for (int j = 0; j < dim; ++j) v[j] = x[j];
  return v;
}

DriftFields empty_drift(const GridSpec& g) {
  DriftFields d;
  d.w.assign(g.dim, ScalarField(g));
  d.M.assign(static_cast<std::size_t>(g.dim) * g.dim, ScalarField(g));
  d.div = ScalarField(g);
  return d;
}

// Drift fields of a phase with spatially constant Hessian Sigma and gradient Sigma x + b.
DriftFields affine_drift(const Mat& Sigma, const Vec& b, double Omega, const GridSpec& g) {
  const int d = g.dim;
  const Mat J = rays::rotation_generator(d);
  const Mat A = Sigma - Omega * J;
  const Mat M = Sigma + Omega * J;
  DriftFields out = empty_drift(g);
  for_each_node(g, [&](std::size_t n, const Point& x) {
    for (int j = 0; j < d; ++j) {
      double s = b[j];
      for (int k = 0; k < d; ++k) s += A(j, k) * x[k];
      out.w[j].values[n] = s;
    }
  });
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) std::fill(out.M[i * d + j].values.begin(), out.M[i * d + j].values.end(), M(i, j));
  std::fill(out.div.values.begin(), out.div.values.end(), Sigma.trace());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// QuadraticDrift

QuadraticDrift::QuadraticDrift(const rays::QuadraticPhase& q0, const SimParams& params, double T, double dt)
    : params_(params), J_(rays::rotation_generator(params.dim)), t0_(q0.t), step_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("QuadraticDrift: dt must be positive");
  const auto steps = static_cast<std::size_t>(std::ceil(std::max(T, 0.0) / dt)) + 2;
  auto traj = rays::quadratic_phase_evolve(q0, params, dt, static_cast<double>(steps) * dt);
  if (traj.status == rays::FlowStatus::caustic && traj.caustic_time <= q0.t + T + dt)
    throw std::runtime_error("QuadraticDrift: caustic at t = " + std::to_string(traj.caustic_time) +
                             " before the requested horizon");
  samples_ = std::move(traj.samples);
  rates_.reserve(samples_.size());
  for (const auto& q : samples_) rates_.push_back(rays::quadratic_phase_rate(q, params));
}

rays::QuadraticPhase QuadraticDrift::at(double t) const {
  const double s = (t - t0_) / step_;
  if (s < -1e-9 || s > static_cast<double>(samples_.size() - 1) + 1e-9)
    throw std::out_of_range("QuadraticDrift: time " + std::to_string(t) + " outside the precomputed range");
  auto k = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, static_cast<double>(samples_.size() - 2)));
  const double th = std::clamp(s - static_cast<double>(k), 0.0, 1.0);
  if (th == 0.0) return samples_[k];
  const double h00 = (2 * th - 3) * th * th + 1, h10 = ((th - 2) * th + 1) * th;
  const double h01 = (3 - 2 * th) * th * th, h11 = (th - 1) * th * th;
  const auto& a = samples_[k];
  const auto& b = samples_[k + 1];
  const auto& ra = rates_[k];
  const auto& rb = rates_[k + 1];
  rays::QuadraticPhase q;
  q.t = t;
  q.Sigma = h00 * a.Sigma + h10 * step_ * ra.Sigma + h01 * b.Sigma + h11 * step_ * rb.Sigma;
  q.b = h00 * a.b + h10 * step_ * ra.b + h01 * b.b + h11 * step_ * rb.b;
  q.c = h00 * a.c + h10 * step_ * ra.c + h01 * b.c + h11 * step_ * rb.c;
  q.det_gamma = h00 * a.det_gamma + h10 * step_ * ra.det_gamma + h01 * b.det_gamma + h11 * step_ * rb.det_gamma;
  q.Sigma = 0.5 * (q.Sigma + q.Sigma.transpose()).eval();
  return q;
}

DriftFields QuadraticDrift::drift(double t, const GridSpec& g) const {
  const auto q = at(t);
  return affine_drift(q.Sigma, q.b, params_.Omega, g);
}

ScalarField QuadraticDrift::phase(double t, const GridSpec& g) const {
  const auto q = at(t);
  return sample<double>(g, [&](const Point& x) { return q.value(to_vec(x, g.dim)); });
}

double QuadraticDrift::max_speed(double t, const GridSpec& g) const {
  const auto q = at(t);
  const Mat A = q.Sigma - params_.Omega * J_;
  double m = 0.0;
  // |A x + b| is convex, so its maximum over the box sits at a corner.
  const int corners = 1 << g.dim;
  for (int c = 0; c < corners; ++c) {
    Vec x(g.dim);
    for (int j = 0; j < g.dim; ++j) x[j] = (c >> j & 1) ? g.half_extent[j] : -g.half_extent[j];
    m = std::max(m, (A * x + q.b).norm());
  }
  return m;
}

// ---------------------------------------------------------------------------
// GeneralDrift

GeneralDrift::GeneralDrift(rays::PhaseFunction S_in, const SimParams& params, double ray_dt)
    : S_in_(std::move(S_in)), params_(params), ray_dt_(ray_dt) {}

const GeneralDrift::Node& GeneralDrift::evaluate(double t, const GridSpec& g) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(t);
  if (it != cache_.end() && it->second.values.size() == g.size()) return it->second;
  Node node;
  node.values.resize(g.size());
  for_each_node(g, [&](std::size_t n, const Point& x) {
    node.values[n] = rays::eval_phase_general(t, to_vec(x, g.dim), S_in_, params_, ray_dt_);
  });
  return cache_[t] = std::move(node);
}

DriftFields GeneralDrift::drift(double t, const GridSpec& g) const {
  const auto& node = evaluate(t, g);
  const int d = g.dim;
  const Mat J = rays::rotation_generator(d);
  DriftFields out = empty_drift(g);
  for_each_node(g, [&](std::size_t n, const Point& x) {
    const auto& e = node.values[n];
    const Vec xv = to_vec(x, d);
    const Vec w = e.grad - params_.Omega * (J * xv);
    const Mat M = e.hess + params_.Omega * J;
    for (int i = 0; i < d; ++i) {
      out.w[i].values[n] = w[i];
      for (int j = 0; j < d; ++j) out.M[i * d + j].values[n] = M(i, j);
    }
    out.div.values[n] = e.hess.trace();
  });
  return out;
}

ScalarField GeneralDrift::phase(double t, const GridSpec& g) const {
  const auto& node = evaluate(t, g);
  ScalarField out(g);
  for (std::size_t n = 0; n < g.size(); ++n) out.values[n] = node.values[n].S;
  return out;
}

// ---------------------------------------------------------------------------
// RotationDrift

DriftFields RotationDrift::drift(double, const GridSpec& g) const {
  return affine_drift(Mat::Zero(g.dim, g.dim), Vec::Zero(g.dim), params_.Omega, g);
}

ScalarField RotationDrift::phase(double, const GridSpec& g) const { return ScalarField(g); }

// ---------------------------------------------------------------------------
// State and system matrices

ComplexField WKBState::amplitude() const {
  ComplexField a(grid());
  for (std::size_t i = 0; i < a.size(); ++i) a.values[i] = cplx(alpha.values[i], beta.values[i]);
  return a;
}

WKBState make_wkb_state(const ComplexField& a, double eps, bool track_phi) {
  WKBState s;
  s.alpha = real_part(a);
  s.beta = imag_part(a);
  s.v.assign(a.grid.dim, ScalarField(a.grid));
  if (track_phi) s.phi = ScalarField(a.grid);
  s.eps = eps;
  return s;
}

SystemMatrices assemble_matrices(const PointState& s, const Vec& xi, const Nonlinearity& f, double eps) {
  const auto d = xi.size();
  const double fp = f.fprime(s.alpha * s.alpha + s.beta * s.beta);
  if (!(fp > 0.0)) throw std::invalid_argument("assemble_matrices: f' must be positive for the symmetrizer");
  const double vx = s.v.dot(xi);
  SystemMatrices m;
  m.A = Mat::Zero(d + 2, d + 2);
  m.A(0, 0) = vx;
  m.A(1, 1) = vx;
  m.A.block(0, 2, 1, d) = 0.5 * s.alpha * xi.transpose();
  m.A.block(1, 2, 1, d) = 0.5 * s.beta * xi.transpose();
  m.A.block(2, 0, d, 1) = 2.0 * fp * s.alpha * xi;
  m.A.block(2, 1, d, 1) = 2.0 * fp * s.beta * xi;
  m.A.block(2, 2, d, d) = vx * Mat::Identity(d, d);
  m.B = s.w.dot(xi) * Mat::Identity(d + 2, d + 2);
  m.M = Mat::Zero(d + 2, d + 2);
  m.M(0, 0) = m.M(1, 1) = 0.5 * s.Dw.trace();
  m.M.block(2, 2, d, d) = s.Dw;
  m.Q = Mat::Identity(d + 2, d + 2);
  m.Q.block(2, 2, d, d) /= 4.0 * fp;
  m.dispersion = 0.5 * eps;
  return m;
}

// ---------------------------------------------------------------------------
// Right-hand side

Rhs rhs_wkb(const WKBState& s, const DriftFields& drift, const SimParams& params, double eps,
            const VectorField* extra_force, VelocityForm form) {
  const GridSpec& g = s.grid();
  const int d = g.dim;
  const std::size_t n = g.size();
  ScalarField tmp(g);

  // Transport speed u = v + w.
  VectorField u(d, ScalarField(g));
  for (int j = 0; j < d; ++j)
    for (std::size_t i = 0; i < n; ++i) u[j].values[i] = s.v[j].values[i] + drift.w[j].values[i];

  Rhs r{ScalarField(g), ScalarField(g), VectorField(d, ScalarField(g))};

  // Amplitude transport in split form -(u.grad a + div(u a)) / 2, equal to
  // -u.grad a - (a/2) div u and discretely mass conserving.
  ScalarField prod(g);
  for (auto [a, out] : {std::pair{&s.alpha, &r.alpha}, std::pair{&s.beta, &r.beta}})
    for (int j = 0; j < d; ++j) {
      fd::derivative(*a, j, tmp);
      for (std::size_t i = 0; i < n; ++i) {
        out->values[i] -= 0.5 * u[j].values[i] * tmp.values[i];
        prod.values[i] = u[j].values[i] * a->values[i];
      }
      fd::derivative(prod, j, tmp);
      for (std::size_t i = 0; i < n; ++i) out->values[i] -= 0.5 * tmp.values[i];
    }
  if (eps > 0.0) {
    for (int j = 0; j < d; ++j) {
      fd::second_derivative(s.beta, j, tmp);
      for (std::size_t i = 0; i < n; ++i) r.alpha.values[i] -= 0.5 * eps * tmp.values[i];
      fd::second_derivative(s.alpha, j, tmp);
      for (std::size_t i = 0; i < n; ++i) r.beta.values[i] += 0.5 * eps * tmp.values[i];
    }
  }

  // Velocity.
  ScalarField press(g);
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = s.alpha.values[i] * s.alpha.values[i] + s.beta.values[i] * s.beta.values[i];
    press.values[i] = params.nonlinearity.f(rho);
    if (form == VelocityForm::gradient)
      for (int j = 0; j < d; ++j)
        press.values[i] += s.v[j].values[i] * (0.5 * s.v[j].values[i] + drift.w[j].values[i]);
  }
  for (int k = 0; k < d; ++k) {
    auto& out = r.v[k].values;
    if (form == VelocityForm::advective)
      for (int j = 0; j < d; ++j) {
        fd::derivative(s.v[k], j, tmp);
        for (std::size_t i = 0; i < n; ++i) out[i] -= u[j].values[i] * tmp.values[i];
        const auto& Mkj = drift.M[k * d + j].values;
        for (std::size_t i = 0; i < n; ++i) out[i] -= Mkj[i] * s.v[j].values[i];
      }
    fd::derivative(press, k, tmp);
    for (std::size_t i = 0; i < n; ++i) out[i] -= tmp.values[i];
    if (extra_force)
      for (std::size_t i = 0; i < n; ++i) out[i] -= (*extra_force)[k].values[i];
  }
  return r;
}

ScalarField phase_rate(const WKBState& s, const DriftFields& drift, const Nonlinearity& f) {
  const GridSpec& g = s.grid();
  ScalarField r(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double vv = 0.0, wv = 0.0;
    for (int j = 0; j < g.dim; ++j) {
      vv += s.v[j].values[i] * s.v[j].values[i];
      wv += drift.w[j].values[i] * s.v[j].values[i];
    }
    const double rho = s.alpha.values[i] * s.alpha.values[i] + s.beta.values[i] * s.beta.values[i];
    r.values[i] = -(0.5 * vv + wv + f.f(rho));
  }
  return r;
}

void PhaseAccumulator::push(double t, const ScalarField& rate) {
  if (last_rate_) {
    const double h = t - t_;
    for (std::size_t i = 0; i < phi_.size(); ++i)
      phi_.values[i] += 0.5 * h * (last_rate_->values[i] + rate.values[i]);
  }
  last_rate_ = rate;
  t_ = t;
}

std::vector<ScalarField> accumulate_phi(const std::vector<WKBState>& trajectory, const DriftSource& drift,
                                        const SimParams& params) {
  std::vector<ScalarField> out;
  if (trajectory.empty()) return out;
  const auto& s0 = trajectory.front();
  PhaseAccumulator acc(s0.phi ? *s0.phi : ScalarField(s0.grid()), s0.t);
  for (const auto& s : trajectory) {
    acc.push(s.t, phase_rate(s, drift.drift(s.t, s.grid()), params.nonlinearity));
    out.push_back(acc.phi());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time stepping

namespace {

ScalarField sponge_profile(const GridSpec& g, const SpongeOptions& opt) {
  ScalarField s(g);
  if (opt.strength <= 0.0 || opt.fraction <= 0.0) return s;
  for_each_node(g, [&](std::size_t i, const Point& x) {
    double z = 0.0;
    for (int j = 0; j < g.dim; ++j) {
      const double L = g.half_extent[j];
      const double inner = (1.0 - opt.fraction) * L;
      z = std::max(z, std::clamp((std::abs(x[j]) - inner) / (L - inner), 0.0, 1.0));
    }
    const double sn = std::sin(0.5 * std::numbers::pi * z);
    s.values[i] = opt.strength * sn * sn;
  });
  return s;
}

struct Fields {
  ScalarField alpha, beta;
  VectorField v;
};

Fields combine(const WKBState& s, double h, const Rhs& k) {
  Fields f{s.alpha, s.beta, s.v};
  for (std::size_t i = 0; i < f.alpha.size(); ++i) {
    f.alpha.values[i] += h * k.alpha.values[i];
    f.beta.values[i] += h * k.beta.values[i];
  }
  for (std::size_t j = 0; j < f.v.size(); ++j)
    for (std::size_t i = 0; i < f.alpha.size(); ++i) f.v[j].values[i] += h * k.v[j].values[i];
  return f;
}

bool finite(const WKBState& s) {
  if (!all_finite(s.alpha) || !all_finite(s.beta)) return false;
  for (const auto& c : s.v)
    if (!all_finite(c)) return false;
  return !s.phi || all_finite(*s.phi);
}

void add_sponge(Rhs& r, const WKBState& s, const WKBState& ref, const ScalarField& sigma, bool velocity) {
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double k = sigma.values[i];
    if (k == 0.0) continue;
    r.alpha.values[i] -= k * (s.alpha.values[i] - ref.alpha.values[i]);
    r.beta.values[i] -= k * (s.beta.values[i] - ref.beta.values[i]);
    if (velocity)
      for (std::size_t j = 0; j < r.v.size(); ++j) r.v[j].values[i] -= k * (s.v[j].values[i] - ref.v[j].values[i]);
  }
}

double max_abs_vector(const VectorField& v) {
  double m = 0.0;
  if (v.empty()) return 0.0;
  for (std::size_t i = 0; i < v[0].size(); ++i) {
    double s = 0.0;
    for (const auto& c : v) s += c.values[i] * c.values[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

std::vector<WKBState> run_rk4(const WKBState& state0, const DriftSource& drift, const SimParams& params, double T,
                              double dt, const WKBOptions& opts, const VectorField* force) {
  const GridSpec& g = state0.grid();
  g.validate();
  if (!(dt > 0.0) || !(T >= 0.0)) throw std::invalid_argument("evolve_wkb: need dt > 0 and T >= 0");
  const double eps = state0.eps;
  if (eps < 0.0) throw std::invalid_argument("evolve_wkb: eps must be nonnegative");

  double dx = g.spacing(0);
  for (int j = 1; j < g.dim; ++j) dx = std::min(dx, g.spacing(j));
  const double vmax = max_abs_vector(state0.v);
  for (int k = 0; k <= 4; ++k) {
    const double t = state0.t + 0.25 * k * T;
    const double speed = vmax + drift.max_speed(t, g);
    if (speed > 0.0 && dt > 0.5 * dx / speed)
      throw CflViolation("evolve_wkb: dt = " + std::to_string(dt) + " exceeds the advective bound 0.5 dx / max|v + w| = " +
                         std::to_string(0.5 * dx / speed) + " at t = " + std::to_string(t));
  }
  if (eps > 0.0 && dt > 0.2 * dx * dx / eps)
    throw CflViolation("evolve_wkb: dt = " + std::to_string(dt) + " exceeds the dispersive bound 0.2 dx^2 / eps = " +
                       std::to_string(0.2 * dx * dx / eps));

  const ScalarField sigma = sponge_profile(g, opts.sponge);
  const std::size_t stride = std::max<std::size_t>(1, opts.stride);
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;

  auto stage = [&](const WKBState& s, double t) {
    const auto dr = drift.drift(t, g);
    Rhs r = rhs_wkb(s, dr, params, eps, force, opts.velocity_form);
    add_sponge(r, s, state0, sigma, opts.sponge.relax_velocity);
    return std::make_pair(std::move(r), std::move(dr));
  };

  std::vector<WKBState> out;
  WKBState s = state0;
  std::optional<PhaseAccumulator> acc;
  if (s.phi) acc.emplace(*s.phi, s.t);
  auto emit = [&](std::size_t step) {
    if (opts.observer) opts.observer(s, step);
    if (opts.keep_states) out.push_back(s);
  };

  auto [k1, d1] = stage(s, s.t);
  if (acc) acc->push(s.t, phase_rate(s, d1, params.nonlinearity));
  emit(0);
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t = state0.t + static_cast<double>(n - 1) * h;
    auto mid = [&](const Fields& f, double tt) {
      WKBState w;
      w.alpha = f.alpha;
      w.beta = f.beta;
      w.v = f.v;
      w.eps = eps;
      w.t = tt;
      return w;
    };
    const WKBState s2 = mid(combine(s, 0.5 * h, k1), t + 0.5 * h);
    auto k2 = stage(s2, t + 0.5 * h).first;
    const WKBState s3 = mid(combine(s, 0.5 * h, k2), t + 0.5 * h);
    auto k3 = stage(s3, t + 0.5 * h).first;
    const WKBState s4 = mid(combine(s, h, k3), t + h);
    auto k4 = stage(s4, t + h).first;

    const std::size_t npts = g.size();
    auto update = [&](std::vector<double>& y, const std::vector<double>& a, const std::vector<double>& b,
                      const std::vector<double>& c, const std::vector<double>& e) {
      for (std::size_t i = 0; i < npts; ++i) y[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + e[i]);
    };
    update(s.alpha.values, k1.alpha.values, k2.alpha.values, k3.alpha.values, k4.alpha.values);
    update(s.beta.values, k1.beta.values, k2.beta.values, k3.beta.values, k4.beta.values);
    for (std::size_t j = 0; j < s.v.size(); ++j)
      update(s.v[j].values, k1.v[j].values, k2.v[j].values, k3.v[j].values, k4.v[j].values);
    s.t = state0.t + static_cast<double>(n) * h;

    auto next = stage(s, s.t);
    k1 = std::move(next.first);
    if (acc) {
      acc->push(s.t, phase_rate(s, next.second, params.nonlinearity));
      s.phi = acc->phi();
    }
    if (!finite(s)) throw NumericalAbort("evolve_wkb: non-finite value at step " + std::to_string(n), n);
    if (n % stride == 0 || n == steps) emit(n);
  }
  return out;
}

}  // namespace

std::vector<WKBState> evolve_wkb(const WKBState& state0, const DriftSource& drift, const SimParams& params, double T,
                                 double dt, const WKBOptions& opts) {
  return run_rk4(state0, drift, params, T, dt, opts, nullptr);
}

double gradient_consistency(const WKBState& s) {
  if (!s.phi) throw std::invalid_argument("gradient_consistency: state carries no phase");
  double m = 0.0;
  for (int j = 0; j < s.grid().dim; ++j) {
    const auto gphi = fd::derivative(*s.phi, j);
    for (std::size_t i = 0; i < gphi.size(); ++i) m = std::max(m, std::abs(gphi.values[i] - s.v[j].values[i]));
  }
  return m;
}

std::vector<HydroState> evolve_hydro(const HydroState& h0, const SimParams& params, double T, double dt,
                                     const WKBOptions& opts) {
  const GridSpec& g = h0.rho.grid;
  WKBState s0;
  s0.alpha = ScalarField(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (h0.rho.values[i] < 0.0) throw std::invalid_argument("evolve_hydro: rho must be nonnegative");
    s0.alpha.values[i] = std::sqrt(h0.rho.values[i]);
  }
  s0.beta = ScalarField(g);
  s0.v = h0.v;
  s0.eps = 0.0;
  s0.t = h0.t;

  VectorField force(g.dim, ScalarField(g));
  for_each_node(g, [&](std::size_t i, const Point& x) {
    const Point gv = potential_gradient(params, x);
    for (int j = 0; j < g.dim; ++j) force[j].values[i] = gv[j];
  });

  WKBOptions o = opts;
  o.sponge.relax_velocity = false;
  std::vector<HydroState> out;
  auto to_hydro = [&](const WKBState& s) {
    HydroState h{ScalarField(g), s.v, s.t};
    for (std::size_t i = 0; i < g.size(); ++i)
      h.rho.values[i] = s.alpha.values[i] * s.alpha.values[i] + s.beta.values[i] * s.beta.values[i];
    return h;
  };
  o.keep_states = false;
  o.observer = [&](const WKBState& s, std::size_t step) {
    HydroState h = to_hydro(s);
    if (opts.keep_states) out.push_back(h);
    if (opts.observer) opts.observer(s, step);
  };
  run_rk4(s0, RotationDrift(params), params, T, dt, o, &force);
  return out;
}

// ---------------------------------------------------------------------------
// Madelung variables and vortex diagnostics

Madelung madelung_extract(const ComplexField& psi, double eps) {
  const GridSpec& g = psi.grid;
  const auto grad = spectral_gradient(psi);
  Madelung m{ScalarField(g), VectorField(g.dim, ScalarField(g)), VectorField(g.dim, ScalarField(g))};
  double rmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    m.rho.values[i] = std::norm(psi.values[i]);
    rmax = std::max(rmax, m.rho.values[i]);
  }
  const double floor = 1e-12 * rmax;
  for (int j = 0; j < g.dim; ++j)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double J = eps * (std::conj(psi.values[i]) * grad[j].values[i]).imag();
      m.current[j].values[i] = J;
      const double r = std::max(m.rho.values[i], floor);
      m.velocity[j].values[i] = r > 0.0 ? J / r : 0.0;
    }
  return m;
}

namespace {

// Counterclockwise node indices of the square loop [-h, h]^2 (d = 2).
std::vector<std::array<int, 2>> square_loop(const GridSpec& g, double half_side) {
  if (g.dim != 2) throw std::invalid_argument("square loop diagnostics need d = 2");
  auto idx = [&](int axis, double x) { return static_cast<int>(std::lround((x + g.half_extent[axis]) / g.spacing(axis))); };
  const int i0 = idx(0, -half_side), i1 = idx(0, half_side);
  const int j0 = idx(1, -half_side), j1 = idx(1, half_side);
  if (i0 < 0 || j0 < 0 || i1 >= g.points[0] || j1 >= g.points[1] || i1 <= i0 || j1 <= j0)
    throw std::invalid_argument("square loop does not fit inside the grid");
  std::vector<std::array<int, 2>> loop;
  for (int i = i0; i < i1; ++i) loop.push_back({i, j0});
  for (int j = j0; j < j1; ++j) loop.push_back({i1, j});
  for (int i = i1; i > i0; --i) loop.push_back({i, j1});
  for (int j = j1; j > j0; --j) loop.push_back({i0, j});
  return loop;
}

}  // namespace

double circulation(const VectorField& v, double half_side) {
  const GridSpec& g = v.at(0).grid;
  const auto loop = square_loop(g, half_side);
  double c = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const auto a = loop[k];
    const auto b = loop[(k + 1) % loop.size()];
    const std::size_t fa = a[0] * g.stride(0) + a[1] * g.stride(1);
    const std::size_t fb = b[0] * g.stride(0) + b[1] * g.stride(1);
    const double dxv = g.node(0, b[0]) - g.node(0, a[0]);
    const double dyv = g.node(1, b[1]) - g.node(1, a[1]);
    c += 0.5 * ((v[0].values[fa] + v[0].values[fb]) * dxv + (v[1].values[fa] + v[1].values[fb]) * dyv);
  }
  return c;
}

int winding_number(const ComplexField& psi, double half_side) {
  const GridSpec& g = psi.grid;
  const auto loop = square_loop(g, half_side);
  double total = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const auto a = loop[k];
    const auto b = loop[(k + 1) % loop.size()];
    const cplx za = psi.values[a[0] * g.stride(0) + a[1] * g.stride(1)];
    const cplx zb = psi.values[b[0] * g.stride(0) + b[1] * g.stride(1)];
    total += std::arg(zb * std::conj(za));
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace rotorwkb::wkb
