#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "rotorwkb/hj_rays.hpp"

using namespace rotorwkb;
using namespace rotorwkb::rays;

namespace {

SimParams params(double Omega, double w1, double w2) {
  SimParams p;
  p.eps = 0.1;
  p.Omega = Omega;
  p.omega = {w1, w2, 1.0};
  return p;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// Non-quadratic initial phase with closed-form derivatives.
PhaseFunction wavy_phase() {
  PhaseFunction S;
  S.value = [](const Vec& x) { return 0.1 * std::sin(x[0]) * std::cos(0.5 * x[1]) + 0.05 * x[0] * x[1]; };
  S.gradient = [](const Vec& x) {
    return vec2(0.1 * std::cos(x[0]) * std::cos(0.5 * x[1]) + 0.05 * x[1],
                -0.05 * std::sin(x[0]) * std::sin(0.5 * x[1]) + 0.05 * x[0]);
  };
  S.hessian = [](const Vec& x) {
    Mat H(2, 2);
    H(0, 0) = -0.1 * std::sin(x[0]) * std::cos(0.5 * x[1]);
    H(0, 1) = H(1, 0) = -0.05 * std::cos(x[0]) * std::sin(0.5 * x[1]) + 0.05;
    H(1, 1) = -0.025 * std::sin(x[0]) * std::cos(0.5 * x[1]);
    return H;
  };
  return S;
}

}  // namespace

TEST_SUITE("hj_rays") {

TEST_CASE("rotation generator and Hamiltonian vector field") {
  const Mat J = rotation_generator(2);
  const Vec Jx = J * vec2(1.0, 2.0);
  CHECK(Jx[0] == 2.0);
  CHECK(Jx[1] == -1.0);
  CHECK(rotation_generator(3)(2, 2) == 0.0);

  const auto [x0, p0] = hamiltonian_rhs(vec2(0.0, 0.0), vec2(0.0, 0.0), params(0.7, 1.0, 2.0));
  CHECK(x0.norm() == 0.0);
  CHECK(p0.norm() == 0.0);
  const auto [xd, pd] = hamiltonian_rhs(vec2(1.0, 0.0), vec2(0.0, 0.0), params(0.0, 1.0, 1.0));
  CHECK(xd.norm() == 0.0);
  CHECK(pd[0] == -1.0);
  CHECK(pd[1] == 0.0);
  CHECK(hamiltonian(vec2(1.0, 2.0), vec2(0.5, -1.0), params(0.5, 2.0, 1.0)) ==
        doctest::Approx(0.5 * 1.25 + 0.5 * (4.0 + 4.0) - 0.5 * (2.0 * 0.5 + (-1.0) * (-1.0))));
}

TEST_CASE("rigid rotation without trap") {
  const SimParams p = params(1.0, 0.0, 0.0);
  const Ray r0 = make_ray(vec2(1.2, -0.4), QuadraticPhase::zero(2).as_function());
  const auto traj = integrate_ray(r0, p, 1e-3, 2.0, 100);
  CHECK(traj.status == FlowStatus::ok);
  for (const auto& s : traj.samples) {
    const double c = std::cos(s.t), sn = std::sin(s.t);
    CHECK(s.x[0] == doctest::Approx(c * 1.2 + sn * 0.4).epsilon(1e-10));
    CHECK(s.x[1] == doctest::Approx(sn * 1.2 - c * 0.4).epsilon(1e-10));
    CHECK(s.p.norm() < 1e-14);
  }
}

TEST_CASE("trivial ray") {
  SimParams p = params(0.0, 0.0, 0.0);
  const auto traj = integrate_ray(make_ray(vec2(0.3, 0.9), QuadraticPhase::zero(2).as_function()), p, 1e-2, 1.0);
  for (const auto& s : traj.samples) {
    CHECK((s.x - vec2(0.3, 0.9)).norm() == 0.0);
    CHECK(s.p.norm() == 0.0);
    CHECK((s.gamma - Mat::Identity(2, 2)).norm() == 0.0);
    CHECK(s.sigma.norm() == 0.0);
    CHECK(s.action == 0.0);
  }
}

TEST_CASE("Riccati blow-up along a ray") {
  const SimParams p = params(0.0, 1.0, 1.0);
  const auto traj = integrate_ray(make_ray(vec2(0.5, -0.2), QuadraticPhase::zero(2).as_function()), p, 1e-3, 2.0, 10);
  CHECK(traj.status == FlowStatus::caustic);
  CHECK(traj.caustic_time < std::numbers::pi / 2.0 + 0.05);
  CHECK(traj.caustic_time > 1.4);
  for (const auto& s : traj.samples)
    if (s.t <= 1.4) {
      CHECK(s.sigma(0, 0) == doctest::Approx(-std::tan(s.t)).epsilon(1e-8));
      CHECK(std::abs(s.sigma(0, 1)) < 1e-12);
    }
}

TEST_CASE("determinant identity and energy conservation") {
  const SimParams p = params(1.0, 1.3, 0.8);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 10; ++k) {
    const Ray r0 = make_ray(vec2(u(rng), u(rng)), wavy_phase());
    const auto traj = integrate_ray(r0, p, 1e-3, 1.0, 50);
    REQUIRE(traj.status == FlowStatus::ok);
    const double H0 = hamiltonian(r0.x, r0.p, p);
    for (const auto& s : traj.samples) {
      CHECK(std::abs(s.gamma.determinant() - std::exp(s.trace_integral)) < 1e-8);
      CHECK(std::abs(hamiltonian(s.x, s.p, p) - H0) < 1e-8 * std::max(1.0, std::abs(H0)));
      CHECK((s.sigma - s.sigma.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("quadratic phase flow") {
  auto traj = quadratic_phase_evolve(QuadraticPhase::zero(2), params(0.8, 0.0, 0.0), 1e-2, 3.0);
  for (const auto& q : traj.samples) {
    CHECK(q.Sigma.norm() == 0.0);
    CHECK(q.b.norm() == 0.0);
    CHECK(q.c == 0.0);
  }

  traj = quadratic_phase_evolve(QuadraticPhase::zero(2), params(0.0, 1.0, 1.0), 1e-3, 2.0, 100);
  CHECK(traj.status == FlowStatus::caustic);
  CHECK(traj.caustic_time < std::numbers::pi / 2.0 + 0.05);
  for (const auto& q : traj.samples)
    if (q.t <= 1.4) CHECK((q.Sigma + std::tan(q.t) * Mat::Identity(2, 2)).norm() < 1e-6);
}

TEST_CASE("quadratic phase solves the rotating HJ equation") {
  const SimParams p = params(0.9, 1.4, 0.7);
  QuadraticPhase q0 = QuadraticPhase::zero(2);
  q0.Sigma << 0.3, -0.1, -0.1, 0.2;
  q0.b = vec2(0.4, -0.3);
  q0.c = 0.1;
  const auto traj = quadratic_phase_evolve(q0, p, 1e-3, 0.8, 40);
  REQUIRE(traj.status == FlowStatus::ok);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& q : traj.samples)
    for (int k = 0; k < 5; ++k) CHECK(std::abs(hj_residual(q, p, vec2(u(rng), u(rng)))) < 1e-8);

  // Time derivative by differencing the trajectory agrees with the rate.
  const auto fine = quadratic_phase_evolve(q0, p, 1e-3, 0.2, 1);
  const auto& a = fine.samples[100];
  const auto& b = fine.samples[102];
  const auto& mid = fine.samples[101];
  const QuadraticPhase rate = quadratic_phase_rate(mid, p);
  CHECK(((b.Sigma - a.Sigma) / (b.t - a.t) - rate.Sigma).norm() < 1e-5);
}

TEST_CASE("shooting evaluation") {
  const SimParams p = params(0.6, 1.2, 0.9);
  const PhaseFunction S = wavy_phase();
  const Vec x = vec2(0.7, -0.4);
  const PhaseEval e0 = eval_phase_general(0.0, x, S, p);
  CHECK(e0.S == S.value(x));
  CHECK((e0.grad - S.gradient(x)).norm() == 0.0);
  CHECK((e0.hess - S.hessian(x)).norm() == 0.0);

  QuadraticPhase q0 = QuadraticPhase::zero(2);
  q0.Sigma << 0.2, 0.1, 0.1, -0.1;
  q0.b = vec2(0.1, -0.2);
  const auto traj = quadratic_phase_evolve(q0, p, 1e-3, 0.7, 1);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 5; ++k) {
    const auto& q = traj.samples[200 + 100 * k];
    const Vec y = vec2(u(rng), u(rng));
    const PhaseEval e = eval_phase_general(q.t, y, q0.as_function(), p);
    CHECK(e.S == doctest::Approx(q.value(y)).epsilon(1e-8));
    CHECK((e.grad - q.gradient(y)).norm() < 1e-8);
    CHECK((e.hess - q.Sigma).norm() < 1e-8);
  }

  // Gradient from rays against centred differences of S.
  auto fd_error = [&](double h) {
    const double t = 0.5;
    const PhaseEval c = eval_phase_general(t, x, S, p);
    const double d0 = (eval_phase_general(t, x + vec2(h, 0.0), S, p).S - eval_phase_general(t, x - vec2(h, 0.0), S, p).S) / (2 * h);
    const double d1 = (eval_phase_general(t, x + vec2(0.0, h), S, p).S - eval_phase_general(t, x - vec2(0.0, h), S, p).S) / (2 * h);
    return (vec2(d0, d1) - c.grad).norm();
  };
  const double r = fd_error(0.1) / fd_error(0.05);
  CHECK(r > 3.5);
  CHECK(r < 4.5);
}

TEST_CASE("shooting through a caustic fails") {
  const SimParams p = params(0.0, 1.0, 1.0);
  CHECK_THROWS_AS(eval_phase_general(1.7, vec2(0.1, 0.1), QuadraticPhase::zero(2).as_function(), p), PhaseEvalError);
}

TEST_CASE("subquadratic monitor") {
  const std::vector<Vec> pts{vec2(0.0, 0.0), vec2(1.0, -1.0), vec2(2.0, 0.5)};
  CHECK(subquadratic_monitor(QuadraticPhase::zero(2).as_function().hessian, pts) == 0.0);
  const auto traj = quadratic_phase_evolve(QuadraticPhase::zero(2), params(0.0, 1.0, 1.0), 1e-3, 1.0);
  const QuadraticPhase q = traj.samples.back();
  CHECK(subquadratic_monitor(q.as_function().hessian, pts) == doctest::Approx(std::tan(1.0)).epsilon(1e-8));
  const std::vector<Vec> wide{vec2(0.0, 0.0), vec2(40.0, -30.0)};
  CHECK(subquadratic_monitor(q.as_function().hessian, wide) == subquadratic_monitor(q.as_function().hessian, pts));
}

TEST_CASE("ray csv") {
  const SimParams p = params(0.0, 1.0, 1.0);
  std::vector<RayTrajectory> bundle{integrate_ray(make_ray(vec2(1.0, 0.0), QuadraticPhase::zero(2).as_function()), p, 0.1, 0.2)};
  std::ostringstream out;
  write_ray_csv(out, bundle, 2);
  const std::string s = out.str();
  CHECK(s.rfind("ray,t,x1,x2,p1,p2,det_gamma,tr_sigma,action\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}

}  // TEST_SUITE
