#ifndef TIKHOFLOW_DYNAMICS_HPP
#define TIKHOFLOW_DYNAMICS_HPP

#include "tikhoflow/operators.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tikhoflow::dynamics {

/// Parameters of the damped flow
///   xdd + (alpha/t^q) xd + beta t^q d/dt A(x) + (1 - gamma/t^s) A(x)
///       + (c/t^{2q+s}) x = 0.
/// Admissibility: alpha > 1; q, s, beta, gamma > 0; 0 < q+s < 1; t0 > 0;
/// and c in (0, 8 alpha (alpha-1) gamma / (alpha^2 beta^2 + 8 (alpha-1) beta)),
/// or c = 0 in baseline mode (contrast runs without the regularizing pull).
struct FlowParams {
  double alpha = 2.0;
  double q = 0.5;
  double s = 0.3;
  double beta = 1.0;
  double gamma = 1.0;
  double c = 0.5;
  double t0 = 1.0;
  bool baseline = false;

  double coupling_exponent() const { return q + s; }          // r
  double tikhonov_exponent() const { return 2.0 * q + s; }    // p
  double tikhonov_scale_bound() const {
    return 8.0 * alpha * (alpha - 1.0) * gamma /
           (alpha * alpha * beta * beta + 8.0 * (alpha - 1.0) * beta);
  }
  /// eps(t) = c / t^{2q+s}.
  double epsilon(double t) const;
};

/// Checks all admissibility constraints and returns the params unchanged.
/// If t0^s <= gamma the leading operator coefficient 1 - gamma/t^s starts
/// nonpositive; that is reported through *warning (when given), not an error.
FlowParams validate_params(const FlowParams& raw, std::string* warning = nullptr);

/// First-order state of the exact reformulation z = xd + beta t^q A(x).
struct FlowState {
  double t = 0.0;
  Vec x;
  Vec z;
};

struct Sample {
  double t = 0.0;
  Vec x;
  Vec z;
  Vec xdot;          // z - beta t^q A(x)
  Vec Ax;
  double norm_x = 0.0;
  double norm_xdot = 0.0;
  double norm_Ax = 0.0;
};

struct IntegratorStats {
  long steps = 0;
  long rejections = 0;
  long rhs_evals = 0;
};

struct Tolerances {
  double rel = 1e-8;
  double abs = 1e-10;
};

struct Trajectory {
  std::vector<Sample> samples;
  IntegratorStats stats;
  FlowParams params;
  Tolerances tols;
};

/// Right-hand side of the reformulated system; exactly one A evaluation:
///   xd = z - beta t^q A(x)
///   zd = -alpha t^{-q} z
///        + (alpha beta - 1 + gamma t^{-s} + beta q t^{q-1}) A(x)
///        - c t^{-(2q+s)} x.
std::pair<Vec, Vec> rhs(double t, const FlowState& state,
                        const ops::MonotoneOperator& op, const FlowParams& params);

/// Integrates from (u0, v0) at t0 with an embedded 5(4) pair, PI step control
/// and cubic Hermite dense output at the schedule points. When land_exactly is
/// set, steps are clamped so every schedule point is hit by an accepted step
/// (no interpolation); used for finite-difference diagnostics.
Trajectory integrate(const ops::MonotoneOperator& op, const FlowParams& params,
                     const Vec& u0, const Vec& v0,
                     const std::vector<double>& schedule, Tolerances tols = {},
                     bool land_exactly = false);

/// Same, but with the reformulated momentum given directly (resuming and
/// re-running trajectories bit-exactly).
Trajectory integrate_state(const ops::MonotoneOperator& op, const FlowParams& params,
                           const Vec& x0, const Vec& z0,
                           const std::vector<double>& schedule, Tolerances tols = {},
                           bool land_exactly = false);

struct ResidualPoint {
  double t = 0.0;
  double residual = 0.0;        // norm of the second-order equation defect
  double ddtA_dot_xdot = 0.0;   // <d/dt A(x), xd>, monotone flows keep this >= 0
};

/// Reconstructs xdd and d/dt A(x) by central differences of width `stencil`
/// at the trajectory's interior sample times (auxiliary integration with
/// exact landing) and evaluates the defect of the original second-order
/// equation there.
std::vector<ResidualPoint> ds_residual(const Trajectory& traj,
                                       const ops::MonotoneOperator& op,
                                       const FlowParams& params, double stencil);

/// Schedule helper: log-spaced from t0 to t_end.
std::vector<double> log_schedule(double t0, double t_end, int points_per_decade);

} // namespace tikhoflow::dynamics

#endif
