#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "rotorwkb/params.hpp"

namespace rotorwkb::rays {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// d x d rotation generator with J x = x_perp (zero third row/column in d = 3).
Mat rotation_generator(int dim);
Mat trap_matrix(const SimParams& params);

/// H(x, p) = |p|^2 / 2 + V(x) - Omega (J x) . p
double hamiltonian(const Vec& x, const Vec& p, const SimParams& params);

/// xdot = p - Omega J x, pdot = -diag(omega^2) x - Omega J p.
std::pair<Vec, Vec> hamiltonian_rhs(const Vec& x, const Vec& p, const SimParams& params);

/// Initial phase with its first two derivatives.
struct PhaseFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

struct Ray {
  Vec x0, x, p;
  Mat sigma;  ///< Hessian of S along the ray
  Mat gamma;  ///< dx / dx0
  double action = 0.0;
  double trace_integral = 0.0;  ///< int_0^t tr sigma
  double t = 0.0;
};

Ray make_ray(const Vec& x0, const PhaseFunction& S_in);

enum class FlowStatus { ok, caustic };

struct RayTrajectory {
  std::vector<Ray> samples;  ///< t = 0, every `stride` steps, and the last valid state
  FlowStatus status = FlowStatus::ok;
  double caustic_time = 0.0;  ///< time of the first rejected state when status == caustic
};

/// Classical RK4 on (x, p, sigma, gamma, action, int tr sigma):
///   sigma' = -sigma^2 - W + Omega (J^T sigma + sigma J),  gamma' = (sigma - Omega J) gamma,
///   action' = |p|^2 / 2 - V.
/// Stops at the first state with det gamma <= 1e-8, |sigma| > 1e8 or a
/// non-finite entry.
RayTrajectory integrate_ray(const Ray& ray, const SimParams& params, double dt, double T,
                            std::size_t stride = 1);

/// S(t, x) = x^T Sigma x / 2 + b . x + c. det_gamma follows
/// (det gamma)' = tr Sigma det gamma and is used only for caustic detection.
struct QuadraticPhase {
  Mat Sigma;
  Vec b;
  double c = 0.0;
  double t = 0.0;
  double det_gamma = 1.0;

  static QuadraticPhase zero(int dim);
  double value(const Vec& x) const { return 0.5 * x.dot(Sigma * x) + b.dot(x) + c; }
  Vec gradient(const Vec& x) const { return Sigma * x + b; }
  PhaseFunction as_function() const;
};

struct QuadraticTrajectory {
  std::vector<QuadraticPhase> samples;
  FlowStatus status = FlowStatus::ok;
  double caustic_time = 0.0;
};

/// RK4 on Sigma' = -Sigma^2 - W + Omega (J^T Sigma + Sigma J), b' = -Sigma b + Omega J^T b,
/// c' = -|b|^2 / 2.
QuadraticTrajectory quadratic_phase_evolve(const QuadraticPhase& q0, const SimParams& params, double dt,
                                           double T, std::size_t stride = 1);

/// Time derivative (Sigma', b', c', det_gamma') of a quadratic phase.
QuadraticPhase quadratic_phase_rate(const QuadraticPhase& q, const SimParams& params);

/// Residual of the rotational HJ equation S_t + |grad S|^2/2 + V - Omega (J x) . grad S
/// for a quadratic phase, given its time derivative (Sigma', b', c').
double hj_residual(const QuadraticPhase& q, const SimParams& params, const Vec& x);

struct PhaseEval {
  double S = 0.0;
  Vec grad;
  Mat hess;
};

class PhaseEvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// S(t, x_target) by shooting: Newton on x0 with Jacobian gamma until
/// x(t; x0) = x_target. Throws PhaseEvalError on non-convergence (50
/// iterations) or when the ray meets a caustic.
PhaseEval eval_phase_general(double t, const Vec& x_target, const PhaseFunction& S_in,
                             const SimParams& params, double dt = 1e-3);

/// Max spectral norm of the Hessian over the sample points.
double subquadratic_monitor(const std::function<Mat(const Vec&)>& hessian, const std::vector<Vec>& samples);

/// CSV with columns ray,t,x1..xd,p1..pd,det_gamma,tr_sigma,action.
void write_ray_csv(std::ostream& out, const std::vector<RayTrajectory>& bundle, int dim);

}  // namespace rotorwkb::rays
