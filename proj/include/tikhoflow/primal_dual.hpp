#ifndef TIKHOFLOW_PRIMAL_DUAL_HPP
#define TIKHOFLOW_PRIMAL_DUAL_HPP

#include "tikhoflow/dynamics.hpp"
#include "tikhoflow/operators.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace tikhoflow::pd {

/// min f(x) s.t. B x = b_rhs, f smooth convex. A quadratic objective
/// f(x) = x'Qx/2 + q_lin'x unlocks the closed-form oracles.
struct ConstrainedProblem {
  int n = 0; // primal dimension
  int m = 0; // number of constraints
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad_f;
  Mat B;
  Vec b_rhs;
  std::optional<std::pair<Mat, Vec>> quadratic; // (Q, q_lin)
};

ConstrainedProblem make_qp(const Mat& Q, const Vec& q_lin, const Mat& B,
                           const Vec& b_rhs);
ConstrainedProblem make_smooth(std::function<double(const Vec&)> f,
                               std::function<Vec(const Vec&)> grad_f, int n,
                               const Mat& B, const Vec& b_rhs);

/// Joint operator A(x, y) = (grad f(x) + B'y, b - B x) on R^{n+m}; monotone
/// (convex gradient plus skew coupling). Quadratic objectives expose the
/// linear representation for closed-form regularized solves.
ops::MonotoneOperator saddle_operator(const ConstrainedProblem& problem);

struct SaddlePoint {
  Vec x;
  Vec y;
  double kkt_residual = 0.0;
};

/// Least-norm solution of the stationarity system
///   [Q  B'; B  0] (x, y) = (-q_lin, b_rhs)
/// i.e. the minimum-norm zero of the joint operator. Quadratic objectives only.
SaddlePoint kkt_oracle(const ConstrainedProblem& problem);

struct PDMetrics {
  std::vector<double> t;
  std::vector<double> feasibility;   // |B x - b|
  std::vector<double> dual_residual; // |grad f + B'y|
  std::vector<double> gap;           // |f(x) - f(x*)| (NaN without an oracle)
  std::vector<double> dist_saddle;   // |(x,y) - (x*,y*)| (NaN without an oracle)
};

struct PDResult {
  dynamics::Trajectory traj; // joint (x, y) trajectory
  PDMetrics metrics;
  std::optional<SaddlePoint> saddle;
};

/// Runs the flow on the joint operator (identical integration path to
/// dynamics::integrate) and derives the per-sample metrics.
PDResult solve_pd(const ConstrainedProblem& problem, const dynamics::FlowParams& params,
                  const Vec& u0, const Vec& v0, const std::vector<double>& schedule,
                  dynamics::Tolerances tols = {});

struct GapReport {
  double M1 = 0.0; // sup |x - x*| over the window
  double M2 = 0.0; // sup |y| over the window
  int upper_failures = 0;
  int lower_failures = 0;
  int checked = 0;
  bool pass = false;
};

/// Verifies at every sample in the window that
///   f(x) - f(x*) <= M1 |grad f + B'y| + M2 |B x - b|   and
///   f(x) - f(x*) >= -|y*| |B x - b|.
GapReport gap_bound_check(const ConstrainedProblem& problem, const PDResult& result,
                          double window_lo, double window_hi);

} // namespace tikhoflow::pd

#endif
