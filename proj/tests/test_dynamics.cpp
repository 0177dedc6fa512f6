#include "tikhoflow/dynamics.hpp"
#include "tikhoflow/problems.hpp"

#include <doctest.h>

#include "oracles.hpp"

#include <cmath>

using namespace tikhoflow;
using dynamics::FlowParams;
using dynamics::FlowState;
using dynamics::Tolerances;

namespace {

FlowParams basic_params() {
  FlowParams p;
  p.alpha = 2.0;
  p.q = 0.5;
  p.s = 0.3;
  p.beta = 1.0;
  p.gamma = 1.0;
  p.c = 0.5;
  p.t0 = 1.0;
  return p;
}

double max_residual(const std::vector<dynamics::ResidualPoint>& pts) {
  double m = 0.0;
  for (const auto& r : pts) m = std::max(m, r.residual);
  return m;
}

} // namespace

TEST_SUITE("dynamics") {

TEST_CASE("parameter validation") {
  FlowParams p = basic_params();
  p.c = 1.0;
  // 8*2*1*1 / (4*1 + 8*1*1) = 16/12
  CHECK(p.tikhonov_scale_bound() == doctest::Approx(16.0 / 12.0).epsilon(1e-15));
  CHECK_NOTHROW(dynamics::validate_params(p));

  p.c = 2.0;
  CHECK_THROWS_AS(dynamics::validate_params(p), TikhonovBound);

  p = basic_params();
  p.alpha = 1.0;
  CHECK_THROWS_AS(dynamics::validate_params(p), AlphaTooSmall);

  p = basic_params();
  p.q = 0.8;
  p.s = 0.4; // q + s = 1.2
  CHECK_THROWS_AS(dynamics::validate_params(p), ExponentRange);

  p = basic_params();
  p.s = -0.1;
  CHECK_THROWS_AS(dynamics::validate_params(p), ExponentRange);

  p = basic_params();
  p.beta = 0.0;
  CHECK_THROWS_AS(dynamics::validate_params(p), NonPositive);

  p = basic_params();
  p.t0 = 0.0;
  CHECK_THROWS_AS(dynamics::validate_params(p), NonPositive);

  p = basic_params();
  p.c = 0.0;
  CHECK_THROWS_AS(dynamics::validate_params(p), NonPositive);
  p.baseline = true;
  CHECK_NOTHROW(dynamics::validate_params(p));
}

TEST_CASE("negative leading-coefficient warning") {
  FlowParams p = basic_params();
  std::string warning;
  dynamics::validate_params(p, &warning); // t0^s = 1 <= gamma = 1
  CHECK_FALSE(warning.empty());

  p.t0 = 16.0;
  p.s = 0.25; // 16^0.25 = 2 > 1
  dynamics::validate_params(p, &warning);
  CHECK(warning.empty());
}

TEST_CASE("reformulated right-hand side") {
  const auto ident = ops::make_affine(Mat::Identity(1, 1), Vec::Zero(1));
  FlowParams p;
  p.alpha = 2.0;
  p.q = 0.5;
  p.s = 0.25;
  p.beta = 1.0;
  p.gamma = 1.0;
  p.c = 0.5;
  p.t0 = 1.0;
  FlowState st{1.0, Vec::Ones(1), Vec::Zero(1)};
  const auto [xd, zd] = dynamics::rhs(1.0, st, ident, p);
  // xd = z - beta t^q A(x) = -1; zd = (alpha beta - 1 + gamma + beta q) - c = 2
  CHECK(xd[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(zd[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("equilibrium annihilates the field in baseline mode") {
  const auto& op = problems::builtin("fullrank_shifted").op;
  FlowParams p = basic_params();
  p.c = 0.0;
  p.baseline = true;
  Vec a(2);
  a << 1, 1; // the zero of A
  FlowState st{2.0, a, Vec::Zero(2)};
  const auto [xd, zd] = dynamics::rhs(2.0, st, op, p);
  CHECK(xd.norm() == 0.0);
  CHECK(zd.norm() == 0.0);
}

TEST_CASE("late-time coefficients settle to the limit form") {
  const auto& rot = problems::builtin("rotation").op;
  FlowParams p = basic_params();
  p.q = 0.75;
  p.s = 0.2;
  const double t = 1e8;
  Vec x(2), z(2);
  x << 1, 2;
  z << 0.3, -0.4;
  FlowState st{t, x, z};
  const auto [xd, zd] = dynamics::rhs(t, st, rot, p);
  const Vec Ax = rot.eval(x);
  const Vec limit = (p.alpha * p.beta - 1.0) * Ax;
  const double envelope = p.alpha * std::pow(t, -p.q) * z.norm() +
                          (p.gamma * std::pow(t, -p.s) +
                           p.beta * p.q * std::pow(t, p.q - 1.0)) *
                              Ax.norm() +
                          p.c * std::pow(t, -p.tikhonov_exponent()) * x.norm();
  CHECK((zd - limit).norm() <= envelope + 1e-6);
  // each dropped coefficient is itself already small
  CHECK(p.gamma * std::pow(t, -p.s) < 0.1);
  CHECK(p.alpha * std::pow(t, -p.q) < 1e-5);
  CHECK(p.c * std::pow(t, -p.tikhonov_exponent()) < 1e-13);
}

TEST_CASE("identity flow reaches the origin and matches fixed-step RK4") {
  const auto& op = problems::builtin("identity").op;
  const FlowParams p = basic_params();
  Vec u0(2), v0(2);
  u0 << 1, 0;
  v0 << 0, 0;
  const auto schedule = dynamics::log_schedule(1.0, 1e3, 50);
  const auto traj = dynamics::integrate(op, p, u0, v0, schedule);
  CHECK(traj.samples.back().norm_x <= 1e-3);

  const Vec z0 = v0 + p.beta * op.eval(u0);
  const long n_fine = 10 * std::max<long>(traj.stats.steps, 1000);
  const auto [x_ref, z_ref] = oracles::rk4(op, p, u0, z0, 1.0, 1e3, n_fine);
  CHECK((traj.samples.back().x - x_ref).norm() <= 1e-6);
}

TEST_CASE("equilibrium initial data stays put") {
  const auto& op = problems::builtin("fullrank_shifted").op;
  FlowParams p = basic_params();
  p.c = 0.0;
  p.baseline = true;
  Vec a(2);
  a << 1, 1;
  const auto schedule = dynamics::log_schedule(1.0, 100.0, 20);
  const auto traj = dynamics::integrate(op, p, a, Vec::Zero(2), schedule);
  for (const auto& smp : traj.samples) CHECK((smp.x - a).norm() <= 1e-9);
}

TEST_CASE("skew shifted smoke run with oracle cross-check") {
  const auto& op = problems::builtin("skew_shifted").op;
  const FlowParams p = basic_params();
  Vec u0(2), v0(2);
  u0 << 3, 1;
  v0 << 0, 0;
  const auto schedule = log_grid(1.0, 1e4, 64);
  const auto traj = dynamics::integrate(op, p, u0, v0, schedule);
  CHECK(traj.samples.size() == 64);
  CHECK(traj.stats.steps > 0);
  CHECK(traj.stats.rejections >= 0);
  for (const auto& smp : traj.samples) {
    CHECK(std::isfinite(smp.norm_x));
    CHECK(std::isfinite(smp.norm_xdot));
  }

  // cross-check the state at t = 100 against fixed-step RK4
  const auto short_schedule = log_grid(1.0, 100.0, 16);
  const auto short_traj = dynamics::integrate(op, p, u0, v0, short_schedule);
  const Vec z0 = v0 + p.beta * op.eval(u0);
  const auto [x_ref, z_ref] = oracles::rk4(op, p, u0, z0, 1.0, 100.0, 40000);
  CHECK((short_traj.samples.back().x - x_ref).norm() <= 1e-6);
}

TEST_CASE("integration is deterministic") {
  const auto& op = problems::builtin("rankdef4").op;
  FlowParams p = basic_params();
  p.q = 0.75;
  p.s = 1.0 / 6.0;
  p.beta = 0.5;
  p.c = 0.25;
  Vec u0(4), v0(4);
  u0 << 2, -1, 3, -2;
  v0.setZero();
  const auto schedule = dynamics::log_schedule(1.0, 100.0, 30);
  const auto a = dynamics::integrate(op, p, u0, v0, schedule);
  const auto b = dynamics::integrate(op, p, u0, v0, schedule);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].t == b.samples[i].t);
    for (int j = 0; j < 4; ++j) {
      CHECK(a.samples[i].x[j] == b.samples[i].x[j]);
      CHECK(a.samples[i].z[j] == b.samples[i].z[j]);
    }
  }
}

TEST_CASE("schedule handling") {
  const auto& op = problems::builtin("identity").op;
  const FlowParams p = basic_params();
  Vec u0 = Vec::Ones(2), v0 = Vec::Zero(2);

  // first sample is at t0 even when the schedule starts later
  const auto traj = dynamics::integrate(op, p, u0, v0, {2.0, 10.0});
  REQUIRE(traj.samples.size() == 3);
  CHECK(traj.samples[0].t == 1.0);
  CHECK((traj.samples[0].x - u0).norm() == 0.0);
  CHECK(traj.samples[1].t == 2.0);
  CHECK(traj.samples[2].t == 10.0);

  CHECK_THROWS_AS(dynamics::integrate(op, p, u0, v0, {10.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(dynamics::integrate(op, p, u0, v0, {0.5, 2.0}), ConfigError);
  CHECK_THROWS_AS(dynamics::integrate(op, p, u0, v0, {2.0}, Tolerances{-1.0, 1e-10}),
                  ConfigError);
}

TEST_CASE("step size underflow reports the last good time") {
  const auto& op = problems::builtin("identity").op;
  const FlowParams p = basic_params();
  Vec u0 = Vec::Ones(2), v0 = Vec::Zero(2);
  Tolerances impossible{1e-300, 1e-300};
  CHECK_THROWS_AS(dynamics::integrate(op, p, u0, v0, {10.0}, impossible),
                  StepSizeUnderflow);
}

TEST_CASE("residual of the second-order form vanishes at equilibrium") {
  const auto& op = problems::builtin("fullrank_shifted").op;
  FlowParams p = basic_params();
  p.c = 0.0;
  p.baseline = true;
  Vec a(2);
  a << 1, 1;
  const auto traj =
      dynamics::integrate(op, p, a, Vec::Zero(2), log_grid(1.0, 10.0, 9));
  const auto res = dynamics::ds_residual(traj, op, p, 1e-4);
  CHECK(max_residual(res) <= 1e-10);
}

TEST_CASE("residual converges at second order in the stencil width") {
  const auto& op = problems::builtin("identity").op;
  const FlowParams p = basic_params();
  Vec u0(2), v0(2);
  u0 << 1, -0.5;
  v0 << 0, 0;
  const auto traj = dynamics::integrate(op, p, u0, v0, log_grid(1.0, 20.0, 24),
                                        Tolerances{1e-10, 1e-12});
  const auto res_h = dynamics::ds_residual(traj, op, p, 1e-4);
  CHECK(max_residual(res_h) <= 1e-5);
  const auto res_h2 = dynamics::ds_residual(traj, op, p, 0.5e-4);
  const double ratio = max_residual(res_h) / max_residual(res_h2);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("residual on a seeded random monotone affine problem") {
  Rng rng(2024);
  Mat R(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) R(i, j) = rng.normal();
  Mat M = R.transpose() * R / 3.0;
  M(0, 1) += 0.4; // add a skew component, monotonicity preserved
  M(1, 0) -= 0.4;
  const Vec a = rng.normal_vec(3);
  const auto op = ops::make_affine(M, a);
  const FlowParams p = basic_params();
  const Vec u0 = rng.normal_vec(3);
  const auto traj = dynamics::integrate(op, p, u0, Vec::Zero(3),
                                        log_grid(1.0, 10.0, 16),
                                        Tolerances{1e-10, 1e-12});
  const auto res_h = dynamics::ds_residual(traj, op, p, 1e-4);
  CHECK(max_residual(res_h) <= 1e-4);
  const auto res_h2 = dynamics::ds_residual(traj, op, p, 0.5e-4);
  const double ratio = max_residual(res_h) / max_residual(res_h2);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("operator derivative dissipation along monotone flows") {
  const FlowParams p = basic_params();
  for (const char* name : {"identity", "skew_shifted", "rankdef4"}) {
    const auto& op = problems::builtin(name).op;
    Rng rng(55);
    const Vec u0 = rng.normal_vec(op.dim());
    const auto traj = dynamics::integrate(op, p, u0, Vec::Zero(op.dim()),
                                          log_grid(1.0, 50.0, 20),
                                          Tolerances{1e-10, 1e-12});
    // tight stencil: skew problems have <d/dt A, xd> = 0 exactly, so the
    // check must sit below the O(h^2) stencil noise
    const auto res = dynamics::ds_residual(traj, op, p, 1e-5);
    for (const auto& r : res) {
      INFO("problem ", name, " at t = ", r.t);
      CHECK(r.ddtA_dot_xdot >= -1e-8);
    }
  }
}

TEST_CASE("insufficient samples is rejected") {
  const auto& op = problems::builtin("identity").op;
  const FlowParams p = basic_params();
  const auto traj = dynamics::integrate(op, p, Vec::Ones(2), Vec::Zero(2), {2.0});
  CHECK_THROWS_AS(dynamics::ds_residual(traj, op, p, 1e-4), InsufficientSamples);
}

} // TEST_SUITE
