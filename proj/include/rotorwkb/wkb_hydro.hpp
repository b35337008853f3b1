#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "rotorwkb/errors.hpp"
#include "rotorwkb/hj_rays.hpp"
#include "rotorwkb/wavefield.hpp"

namespace rotorwkb::wkb {

/// Drift w = grad S - Omega J x on the grid, with M_ij = d_i w_j and div w.
struct DriftFields {
  VectorField w;
  std::vector<ScalarField> M;  ///< d*d fields, row-major (i, j)
  ScalarField div;
};

/// Supplies the HJ phase S(t, .) and its drift on a grid.
class DriftSource {
 public:
  virtual ~DriftSource() = default;
  virtual DriftFields drift(double t, const GridSpec& g) const = 0;
  virtual ScalarField phase(double t, const GridSpec& g) const = 0;
  /// max |w| over the grid at time t.
  virtual double max_speed(double t, const GridSpec& g) const;
};

/// Quadratic S from a precomputed Riccati trajectory, with cubic Hermite
/// interpolation between samples (derivatives from the coefficient ODEs).
class QuadraticDrift : public DriftSource {
 public:
  /// Throws std::runtime_error if the phase meets a caustic before T.
  QuadraticDrift(const rays::QuadraticPhase& q0, const SimParams& params, double T, double dt = 1e-3);

  rays::QuadraticPhase at(double t) const;
  DriftFields drift(double t, const GridSpec& g) const override;
  ScalarField phase(double t, const GridSpec& g) const override;
  double max_speed(double t, const GridSpec& g) const override;

 private:
  SimParams params_;
  rays::Mat J_;
  std::vector<rays::QuadraticPhase> samples_;
  std::vector<rays::QuadraticPhase> rates_;
  double t0_, step_;
};

/// General S_in through ray shooting at every node. Results are cached per
/// time; intended for small grids.
class GeneralDrift : public DriftSource {
 public:
  GeneralDrift(rays::PhaseFunction S_in, const SimParams& params, double ray_dt = 1e-3);

  DriftFields drift(double t, const GridSpec& g) const override;
  ScalarField phase(double t, const GridSpec& g) const override;

 private:
  struct Node {
    std::vector<rays::PhaseEval> values;
  };
  const Node& evaluate(double t, const GridSpec& g) const;

  rays::PhaseFunction S_in_;
  SimParams params_;
  double ray_dt_;
  mutable std::mutex mutex_;
  mutable std::map<double, Node> cache_;
};

/// Pure rotation drift w = -Omega J x, S = 0 (total-velocity formulation).
class RotationDrift : public DriftSource {
 public:
  explicit RotationDrift(const SimParams& params) : params_(params) {}
  DriftFields drift(double t, const GridSpec& g) const override;
  ScalarField phase(double t, const GridSpec& g) const override;

 private:
  SimParams params_;
};

/// U = (Re a, Im a, v) with v = grad phi, plus the accumulated phase phi.
struct WKBState {
  ScalarField alpha, beta;
  VectorField v;
  std::optional<ScalarField> phi;
  double eps = 0.0;
  double t = 0.0;

  const GridSpec& grid() const { return alpha.grid; }
  ComplexField amplitude() const;
};

/// Zero velocity, given amplitude, phi = 0.
WKBState make_wkb_state(const ComplexField& a, double eps, bool track_phi = true);

/// Pointwise coefficients of the first-order system
///   U_t + sum_j (A_j + B_j) d_j U + M U = L U + F,
/// contracted with a direction xi.
struct SystemMatrices {
  Eigen::MatrixXd A;  ///< sum_j A_j xi_j
  Eigen::MatrixXd B;  ///< (w . xi) I
  Eigen::MatrixXd M;  ///< diag(div w / 2, div w / 2, (d_i w_j))
  Eigen::MatrixXd Q;  ///< diag(1, 1, I / (4 f'))
  double dispersion = 0.0;  ///< L = (eps/2) [[0, -Lap], [Lap, 0]] on (alpha, beta)
};

struct PointState {
  double alpha = 0.0, beta = 0.0;
  Eigen::VectorXd v, w;
  Eigen::MatrixXd Dw;  ///< (i, j) = d_i w_j
};

/// Throws std::invalid_argument when f' <= 0 at alpha^2 + beta^2.
SystemMatrices assemble_matrices(const PointState& s, const Eigen::VectorXd& xi, const Nonlinearity& f, double eps);

/// Discrete form of the velocity equation. The two agree when curl v = 0:
///   advective: v_t = -(v + w).grad v - M v - grad f
///   gradient:  v_t = -grad(|v|^2/2 + w.v + f)
/// The gradient form is the exact finite-difference gradient of the phase
/// rate, so grad phi = v holds up to time-quadrature error.
enum class VelocityForm { advective, gradient };

struct Rhs {
  ScalarField alpha, beta;
  VectorField v;
};

/// v_t = -(v + w).grad v - M v - grad f(|a|^2) - extra_force,
///        a_t = -(v + w).grad a - (a/2)(div w + div v) + (i eps/2) Lap a.
/// Fourth-order finite differences with one-sided closures.
Rhs rhs_wkb(const WKBState& s, const DriftFields& drift, const SimParams& params, double eps,
            const VectorField* extra_force = nullptr, VelocityForm form = VelocityForm::gradient);

/// d phi / dt = -(|v|^2/2 + w.v + f(|a|^2)).
ScalarField phase_rate(const WKBState& s, const DriftFields& drift, const Nonlinearity& f);

/// Streaming trapezoid quadrature of phase_rate.
class PhaseAccumulator {
 public:
  PhaseAccumulator(ScalarField phi0, double t0) : phi_(std::move(phi0)), t_(t0) {}
  void push(double t, const ScalarField& rate);
  const ScalarField& phi() const { return phi_; }

 private:
  ScalarField phi_;
  std::optional<ScalarField> last_rate_;
  double t_;
};

/// Trapezoid integration over a stored uniform-stride trajectory; returns
/// phi at every stored time, starting from phi0 (zero if absent).
std::vector<ScalarField> accumulate_phi(const std::vector<WKBState>& trajectory, const DriftSource& drift,
                                        const SimParams& params);

struct SpongeOptions {
  double strength = 10.0;
  double fraction = 0.1;        ///< outer fraction of each half-width
  bool relax_velocity = true;  ///< hydro runs relax only alpha, beta
};

struct WKBOptions {
  std::size_t stride = 1;
  SpongeOptions sponge;
  std::function<void(const WKBState&, std::size_t step)> observer;
  bool keep_states = true;
  VelocityForm velocity_form = VelocityForm::gradient;
};

/// Classical RK4 method of lines. Checks, at construction, dt <= 0.5 dx / max|v + w|
/// (sampled over [0, T]) and dt <= 0.2 dx^2 / eps when eps > 0. When state0.phi
/// is present it is advanced by trapezoid quadrature at every step.
std::vector<WKBState> evolve_wkb(const WKBState& state0, const DriftSource& drift, const SimParams& params,
                                 double T, double dt, const WKBOptions& opts = {});

/// max over the grid of |grad phi - v| using the same finite differences.
double gradient_consistency(const WKBState& s);

struct HydroState {
  ScalarField rho;
  VectorField v;
  double t = 0.0;
};

/// Evolves (alpha, beta, V) with alpha0 = sqrt(rho0), beta0 = 0, total
/// velocity V, drift -Omega J x, trap force -grad V and eps = 0; reads back
/// rho = alpha^2 + beta^2.
std::vector<HydroState> evolve_hydro(const HydroState& h0, const SimParams& params, double T, double dt,
                                     const WKBOptions& opts = {});

struct Madelung {
  ScalarField rho;
  VectorField velocity;
  VectorField current;
};

/// rho = |psi|^2, J = eps Im(conj(psi) grad psi) (spectral), velocity J / max(rho, 1e-12 max rho).
Madelung madelung_extract(const ComplexField& psi, double eps);

/// Line integral of v around the square [-h, h]^2 through grid nodes (d = 2).
double circulation(const VectorField& v, double half_side);

/// Sum of wrapped phase increments of psi around the same square, divided by 2 pi.
int winding_number(const ComplexField& psi, double half_side);

}  // namespace rotorwkb::wkb
