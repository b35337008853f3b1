#include "rotorwkb/hj_rays.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace rotorwkb::rays {

Mat rotation_generator(int dim) {
  Mat J = Mat::Zero(dim, dim);
  J(0, 1) = 1.0;
  J(1, 0) = -1.0;
  return J;
}

Mat trap_matrix(const SimParams& params) {
  Mat W = Mat::Zero(params.dim, params.dim);
  for (int j = 0; j < params.dim; ++j) W(j, j) = params.omega[j] * params.omega[j];
  return W;
}

double hamiltonian(const Vec& x, const Vec& p, const SimParams& params) {
  const Mat J = rotation_generator(params.dim);
  return 0.5 * p.squaredNorm() + 0.5 * x.dot(trap_matrix(params) * x) - params.Omega * (J * x).dot(p);
}

std::pair<Vec, Vec> hamiltonian_rhs(const Vec& x, const Vec& p, const SimParams& params) {
  const Mat J = rotation_generator(params.dim);
  return {p - params.Omega * (J * x), -(trap_matrix(params) * x) - params.Omega * (J * p)};
}

Ray make_ray(const Vec& x0, const PhaseFunction& S_in) {
  Ray r;
  const auto d = x0.size();
  r.x0 = x0;
  r.x = x0;
  r.p = S_in.gradient(x0);
  r.sigma = S_in.hessian(x0);
  r.gamma = Mat::Identity(d, d);
  r.action = S_in.value(x0);
  return r;
}

namespace {

struct Coeffs {
  Mat J, W;
  double Omega;
  explicit Coeffs(const SimParams& p) : J(rotation_generator(p.dim)), W(trap_matrix(p)), Omega(p.Omega) {}

  Mat riccati(const Mat& S) const { return -S * S - W + Omega * (J.transpose() * S + S * J); }
};

struct RayState {
  Vec x, p;
  Mat sigma, gamma;
  double action, trace;

  RayState axpy(double h, const RayState& k) const {
    return {x + h * k.x, p + h * k.p, sigma + h * k.sigma, gamma + h * k.gamma, action + h * k.action,
            trace + h * k.trace};
  }
};

RayState ray_rhs(const RayState& s, const Coeffs& c) {
  RayState k;
  k.x = s.p - c.Omega * (c.J * s.x);
  k.p = -(c.W * s.x) - c.Omega * (c.J * s.p);
  k.sigma = c.riccati(s.sigma);
  k.gamma = (s.sigma - c.Omega * c.J) * s.gamma;
  k.action = 0.5 * s.p.squaredNorm() - 0.5 * s.x.dot(c.W * s.x);
  k.trace = s.sigma.trace();
  return k;
}

bool degenerate(const Mat& sigma, double det_gamma) {
  return !std::isfinite(det_gamma) || !sigma.allFinite() || det_gamma <= 1e-8 || sigma.norm() > 1e8;
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0) || !(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("need dt > 0 and T >= 0");
  return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

}  // namespace

RayTrajectory integrate_ray(const Ray& ray, const SimParams& params, double dt, double T, std::size_t stride) {
  const Coeffs c(params);
  const std::size_t steps = step_count(T, dt);
  const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;
  stride = std::max<std::size_t>(1, stride);

  RayTrajectory traj;
  traj.samples.push_back(ray);
  RayState s{ray.x, ray.p, ray.sigma, ray.gamma, ray.action, ray.trace_integral};
  Ray cur = ray;
  for (std::size_t n = 1; n <= steps; ++n) {
    const RayState k1 = ray_rhs(s, c);
    const RayState k2 = ray_rhs(s.axpy(0.5 * h, k1), c);
    const RayState k3 = ray_rhs(s.axpy(0.5 * h, k2), c);
    const RayState k4 = ray_rhs(s.axpy(h, k3), c);
    RayState next = s.axpy(h / 6.0, k1).axpy(h / 3.0, k2).axpy(h / 3.0, k3).axpy(h / 6.0, k4);
    next.sigma = 0.5 * (next.sigma + next.sigma.transpose());
    const double t = ray.t + static_cast<double>(n) * h;
    if (degenerate(next.sigma, next.gamma.determinant()) || !next.x.allFinite() || !next.p.allFinite()) {
      traj.status = FlowStatus::caustic;
      traj.caustic_time = t;
      if (traj.samples.back().t != cur.t) traj.samples.push_back(cur);
      return traj;
    }
    s = std::move(next);
    cur.x = s.x;
    cur.p = s.p;
    cur.sigma = s.sigma;
    cur.gamma = s.gamma;
    cur.action = s.action;
    cur.trace_integral = s.trace;
    cur.t = t;
    if (n % stride == 0 || n == steps) traj.samples.push_back(cur);
  }
  return traj;
}

QuadraticPhase QuadraticPhase::zero(int dim) {
  QuadraticPhase q;
  q.Sigma = Mat::Zero(dim, dim);
  q.b = Vec::Zero(dim);
  return q;
}

PhaseFunction QuadraticPhase::as_function() const {
  const QuadraticPhase q = *this;
  return {[q](const Vec& x) { return q.value(x); }, [q](const Vec& x) { return q.gradient(x); },
          [q](const Vec&) { return q.Sigma; }};
}

namespace {

struct QuadState {
  Mat S;
  Vec b;
  double c, det;

  QuadState axpy(double h, const QuadState& k) const { return {S + h * k.S, b + h * k.b, c + h * k.c, det + h * k.det}; }
};

QuadState quad_rhs(const QuadState& q, const Coeffs& co) {
  return {co.riccati(q.S), -(q.S * q.b) + co.Omega * (co.J.transpose() * q.b), -0.5 * q.b.squaredNorm(),
          q.S.trace() * q.det};
}

}  // namespace

QuadraticTrajectory quadratic_phase_evolve(const QuadraticPhase& q0, const SimParams& params, double dt,
                                           double T, std::size_t stride) {
  const Coeffs co(params);
  const std::size_t steps = step_count(T, dt);
  const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;
  stride = std::max<std::size_t>(1, stride);

  QuadraticTrajectory traj;
  traj.samples.push_back(q0);
  QuadState s{q0.Sigma, q0.b, q0.c, q0.det_gamma};
  QuadraticPhase cur = q0;
  for (std::size_t n = 1; n <= steps; ++n) {
    const QuadState k1 = quad_rhs(s, co);
    const QuadState k2 = quad_rhs(s.axpy(0.5 * h, k1), co);
    const QuadState k3 = quad_rhs(s.axpy(0.5 * h, k2), co);
    const QuadState k4 = quad_rhs(s.axpy(h, k3), co);
    QuadState next = s.axpy(h / 6.0, k1).axpy(h / 3.0, k2).axpy(h / 3.0, k3).axpy(h / 6.0, k4);
    next.S = 0.5 * (next.S + next.S.transpose());
    const double t = q0.t + static_cast<double>(n) * h;
    if (degenerate(next.S, next.det) || !next.b.allFinite() || !std::isfinite(next.c)) {
      traj.status = FlowStatus::caustic;
      traj.caustic_time = t;
      if (traj.samples.back().t != cur.t) traj.samples.push_back(cur);
      return traj;
    }
    s = std::move(next);
    cur.Sigma = s.S;
    cur.b = s.b;
    cur.c = s.c;
    cur.det_gamma = s.det;
    cur.t = t;
    if (n % stride == 0 || n == steps) traj.samples.push_back(cur);
  }
  return traj;
}

QuadraticPhase quadratic_phase_rate(const QuadraticPhase& q, const SimParams& params) {
  const QuadState k = quad_rhs({q.Sigma, q.b, q.c, q.det_gamma}, Coeffs(params));
  QuadraticPhase r;
  r.Sigma = k.S;
  r.b = k.b;
  r.c = k.c;
  r.det_gamma = k.det;
  r.t = q.t;
  return r;
}

double hj_residual(const QuadraticPhase& q, const SimParams& params, const Vec& x) {
  const Coeffs co(params);
  const QuadState k = quad_rhs({q.Sigma, q.b, q.c, q.det_gamma}, co);
  const double St = 0.5 * x.dot(k.S * x) + k.b.dot(x) + k.c;
  const Vec g = q.gradient(x);
  return St + 0.5 * g.squaredNorm() + 0.5 * x.dot(co.W * x) - co.Omega * (co.J * x).dot(g);
}

PhaseEval eval_phase_general(double t, const Vec& x_target, const PhaseFunction& S_in, const SimParams& params,
                             double dt) {
  auto where = [&] {
    std::string s = "(";
    for (int i = 0; i < x_target.size(); ++i) s += (i ? ", " : "") + std::to_string(x_target[i]);
    return s + ")";
  };
  if (t == 0.0) return {S_in.value(x_target), S_in.gradient(x_target), S_in.hessian(x_target)};

  auto shoot = [&](const Vec& x0) {
    auto traj = integrate_ray(make_ray(x0, S_in), params, dt, t, std::numeric_limits<std::size_t>::max());
    if (traj.status == FlowStatus::caustic)
      throw PhaseEvalError("eval_phase_general: caustic before t = " + std::to_string(t) + " for target " +
                           where());
    return traj.samples.back();
  };

  Vec x0 = x_target;
  Ray r = shoot(x0);
  double res = (r.x - x_target).norm();
  const double tol = 1e-12 * (1.0 + x_target.norm());
  for (int it = 0; it < 50; ++it) {
    if (res <= tol) return {r.action, r.p, r.sigma};
    const Vec step = r.gamma.partialPivLu().solve(r.x - x_target);
    double lambda = 1.0;
    Vec trial = x0 - step;
    Ray rt = shoot(trial);
    double rest = (rt.x - x_target).norm();
    for (int k = 0; k < 30 && rest > res; ++k) {
      lambda *= 0.5;
      trial = x0 - lambda * step;
      rt = shoot(trial);
      rest = (rt.x - x_target).norm();
    }
    x0 = trial;
    r = rt;
    res = rest;
  }
  if (res <= tol) return {r.action, r.p, r.sigma};
  throw PhaseEvalError("eval_phase_general: Newton did not converge in 50 iterations for target " + where());
}

double subquadratic_monitor(const std::function<Mat(const Vec&)>& hessian, const std::vector<Vec>& samples) {
  double worst = 0.0;
  for (const auto& x : samples) {
    const Mat H = hessian(x);
    const Mat Hs = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(Hs, Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return worst;
}

void write_ray_csv(std::ostream& out, const std::vector<RayTrajectory>& bundle, int dim) {
  auto put = [&](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.write(buf, ptr - buf);
  };
  out << "ray,t";
  for (int j = 1; j <= dim; ++j) out << ",x" << j;
  for (int j = 1; j <= dim; ++j) out << ",p" << j;
  out << ",det_gamma,tr_sigma,action\n";
  for (std::size_t k = 0; k < bundle.size(); ++k)
    for (const auto& r : bundle[k].samples) {
      out << k << ',';
      put(r.t);
      for (int j = 0; j < dim; ++j) out << ',', put(r.x[j]);
      for (int j = 0; j < dim; ++j) out << ',', put(r.p[j]);
      out << ',', put(r.gamma.determinant());
      out << ',', put(r.sigma.trace());
      out << ',', put(r.action);
      out << '\n';
    }
}

}  // namespace rotorwkb::rays
