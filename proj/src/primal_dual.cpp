#include "tikhoflow/primal_dual.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace tikhoflow::pd {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_shapes(const ConstrainedProblem& p) {
  if (p.B.rows() != p.m || p.B.cols() != p.n)
    throw DimensionMismatch("constraint matrix must be m x n");
  if (p.b_rhs.size() != p.m)
    throw DimensionMismatch("constraint rhs must have m entries");
}

} // namespace

ConstrainedProblem make_qp(const Mat& Q, const Vec& q_lin, const Mat& B,
                           const Vec& b_rhs) {
  ConstrainedProblem p;
  p.n = static_cast<int>(Q.rows());
  p.m = static_cast<int>(B.rows());
  if (Q.cols() != Q.rows()) throw DimensionMismatch("Q must be square");
  if (q_lin.size() != Q.rows()) throw DimensionMismatch("q_lin size mismatch");
  p.B = B;
  p.b_rhs = b_rhs;
  check_shapes(p);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Q + Q.transpose()),
                                        Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw NotMonotone("objective matrix is not positive semidefinite");
  p.f = [Q, q_lin](const Vec& x) { return 0.5 * x.dot(Q * x) + q_lin.dot(x); };
  p.grad_f = [Q, q_lin](const Vec& x) -> Vec { return Q * x + q_lin; };
  p.quadratic = std::make_pair(Q, q_lin);
  return p;
}

ConstrainedProblem make_smooth(std::function<double(const Vec&)> f,
                               std::function<Vec(const Vec&)> grad_f, int n,
                               const Mat& B, const Vec& b_rhs) {
  ConstrainedProblem p;
  p.n = n;
  p.m = static_cast<int>(B.rows());
  p.f = std::move(f);
  p.grad_f = std::move(grad_f);
  p.B = B;
  p.b_rhs = b_rhs;
  check_shapes(p);
  return p;
}

ops::MonotoneOperator saddle_operator(const ConstrainedProblem& problem) {
  check_shapes(problem);
  const int n = problem.n, m = problem.m;
  if (problem.quadratic) {
    const auto& [Q, q_lin] = *problem.quadratic;
    Mat M = Mat::Zero(n + m, n + m);
    M.topLeftCorner(n, n) = Q;
    M.topRightCorner(n, m) = problem.B.transpose();
    M.bottomLeftCorner(m, n) = -problem.B;
    Vec offset(n + m);
    offset.head(n) = q_lin;
    offset.tail(m) = problem.b_rhs;
    return ops::MonotoneOperator::affine_from_offset(ops::StructureKind::saddle, M,
                                                     offset);
  }
  const Mat B = problem.B;
  const Vec b = problem.b_rhs;
  auto grad = problem.grad_f;
  auto eval = [n, m, B, b, grad](const Vec& xy) -> Vec {
    Vec out(n + m);
    const auto x = xy.head(n);
    out.head(n) = grad(x) + B.transpose() * xy.tail(m);
    out.tail(m) = b - B * x;
    return out;
  };
  return ops::MonotoneOperator::opaque(n + m, eval);
}

SaddlePoint kkt_oracle(const ConstrainedProblem& problem) {
  check_shapes(problem);
  if (!problem.quadratic)
    throw ConfigError("Oracle", "KKT oracle needs a quadratic objective");
  const auto& [Q, q_lin] = *problem.quadratic;
  const int n = problem.n, m = problem.m;

  Mat kkt = Mat::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = Q;
  kkt.topRightCorner(n, m) = problem.B.transpose();
  kkt.bottomLeftCorner(m, n) = problem.B;
  Vec rhs(n + m);
  rhs.head(n) = -q_lin;
  rhs.tail(m) = problem.b_rhs;

  Eigen::CompleteOrthogonalDecomposition<Mat> cod(kkt);
  const Vec sol = cod.solve(rhs);
  const Vec resid = kkt * sol - rhs;
  const double scale = 1.0 + rhs.norm();
  if (resid.tail(m).norm() > 1e-8 * scale)
    throw Infeasible("no x with B x = b within tolerance (residual " +
                     num(resid.tail(m).norm()) + ")");
  if (resid.norm() > 1e-8 * scale)
    throw Infeasible("stationarity system has no solution (residual " +
                     num(resid.norm()) + ")");

  SaddlePoint sp;
  sp.x = sol.head(n);
  sp.y = sol.tail(m);
  sp.kkt_residual = resid.norm();
  return sp;
}

PDResult solve_pd(const ConstrainedProblem& problem, const dynamics::FlowParams& params,
                  const Vec& u0, const Vec& v0, const std::vector<double>& schedule,
                  dynamics::Tolerances tols) {
  const ops::MonotoneOperator op = saddle_operator(problem);
  PDResult result;
  result.traj = dynamics::integrate(op, params, u0, v0, schedule, tols);
  if (problem.quadratic) result.saddle = kkt_oracle(problem);

  const int n = problem.n, m = problem.m;
  const double f_star =
      result.saddle ? problem.f(result.saddle->x) : std::numeric_limits<double>::quiet_NaN();
  Vec star;
  if (result.saddle) {
    star.resize(n + m);
    star.head(n) = result.saddle->x;
    star.tail(m) = result.saddle->y;
  }

  for (const auto& smp : result.traj.samples) {
    result.metrics.t.push_back(smp.t);
    result.metrics.dual_residual.push_back(smp.Ax.head(n).norm());
    result.metrics.feasibility.push_back(smp.Ax.tail(m).norm());
    if (result.saddle) {
      result.metrics.gap.push_back(std::abs(problem.f(smp.x.head(n)) - f_star));
      result.metrics.dist_saddle.push_back((smp.x - star).norm());
    } else {
      result.metrics.gap.push_back(std::numeric_limits<double>::quiet_NaN());
      result.metrics.dist_saddle.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return result;
}

GapReport gap_bound_check(const ConstrainedProblem& problem, const PDResult& result,
                          double window_lo, double window_hi) {
  if (!result.saddle)
    throw ConfigError("Oracle", "gap bound check needs the KKT oracle");
  const SaddlePoint& sp = *result.saddle;
  const double f_star = problem.f(sp.x);
  const double y_star_norm = sp.y.norm();
  const int n = problem.n;

  GapReport report;
  for (const auto& smp : result.traj.samples) {
    if (smp.t < window_lo || smp.t > window_hi) continue;
    report.M1 = std::max(report.M1, (smp.x.head(n) - sp.x).norm());
    report.M2 = std::max(report.M2, smp.x.tail(problem.m).norm());
  }

  for (size_t i = 0; i < result.traj.samples.size(); ++i) {
    const auto& smp = result.traj.samples[i];
    if (smp.t < window_lo || smp.t > window_hi) continue;
    ++report.checked;
    const double lhs = problem.f(smp.x.head(n)) - f_star;
    const double dual = result.metrics.dual_residual[i];
    const double feas = result.metrics.feasibility[i];
    const double slack = 1e-12 * (1.0 + std::abs(f_star));
    if (lhs > report.M1 * dual + report.M2 * feas + slack) ++report.upper_failures;
    if (lhs < -y_star_norm * feas - slack) ++report.lower_failures;
  }
  if (report.checked == 0) throw EmptyWindow("no samples in the gap-check window");
  report.pass = report.upper_failures == 0 && report.lower_failures == 0;
  return report;
}

} // namespace tikhoflow::pd
