#include "tikhoflow/tikhonov.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace tikhoflow::tikhonov {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

TikhonovPoint solve_affine(const ops::AffineForm& aff, double eps) {
  Mat shifted = aff.M;
  shifted.diagonal().array() += eps;
  // symmetric part of M is PSD, so M + eps I is invertible for eps > 0
  Eigen::PartialPivLU<Mat> lu(shifted);
  TikhonovPoint pt;
  pt.eps = eps;
  pt.x = lu.solve(-aff.offset);
  pt.residual = (aff.M * pt.x + aff.offset + eps * pt.x).norm();
  pt.iterations = 1;
  if (!all_finite(pt.x)) throw NonFiniteOutput("regularized solve produced NaN/Inf");
  return pt;
}

TikhonovPoint solve_fixed_point(const ops::MonotoneOperator& op, double eps,
                                const Vec& warm, double tol, long max_iterations) {
  TikhonovPoint pt;
  pt.eps = eps;
  Vec x = warm;
  Vec res = op.eval(x) + eps * x;
  double rn = res.norm();
  double lambda = 1.0;
  const double lambda_floor = 1e-18;
  long iters = 0;
  while (rn > tol) {
    if (iters >= max_iterations)
      throw MaxIterations("fixed point at eps = " + num(eps) + " stalled at residual " +
                          num(rn));
    Vec trial = x - lambda * res;
    Vec trial_res = op.eval(trial) + eps * trial;
    double trial_rn = trial_res.norm();
    while (!(trial_rn < rn)) {
      lambda *= 0.5;
      if (lambda < lambda_floor)
        throw NoProgress("backtracking floor reached at eps = " + num(eps) +
                         ", residual " + num(rn));
      trial = x - lambda * res;
      trial_res = op.eval(trial) + eps * trial;
      trial_rn = trial_res.norm();
    }
    x.swap(trial);
    res.swap(trial_res);
    rn = trial_rn;
    lambda = std::min(lambda * 1.25, 1e12);
    ++iters;
  }
  pt.x = std::move(x);
  pt.residual = rn;
  pt.iterations = iters;
  return pt;
}

} // namespace

double epsilon(double t, const dynamics::FlowParams& params) {
  if (!(t > 0.0)) throw ConfigError("TimeRange", "epsilon needs t > 0");
  return params.epsilon(t);
}

TikhonovPoint tikhonov_point(const ops::MonotoneOperator& op, double eps,
                             const Vec& warm, double tol, long max_iterations) {
  if (!(eps > 0.0)) throw ConfigError("Epsilon", "eps must be positive, got " + num(eps));
  if (!(tol > 0.0)) throw ConfigError("Tolerance", "tol must be positive");
  if (warm.size() != op.dim())
    throw DimensionMismatch("warm start does not match operator dimension");
  if (const auto* aff = op.affine()) {
    TikhonovPoint pt = solve_affine(*aff, eps);
    if (pt.residual > tol) // fall through only on pathological conditioning
      pt = solve_fixed_point(op, eps, pt.x, tol, max_iterations);
    return pt;
  }
  return solve_fixed_point(op, eps, warm, tol, max_iterations);
}

MinimalNormSolution minimal_norm_solution(const ops::MonotoneOperator& op, double tol,
                                          bool allow_continuation) {
  MinimalNormSolution sol;
  if (const auto* aff = op.affine()) {
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(aff->M);
    sol.x_star = cod.solve(-aff->offset);
    sol.method = MinimalNormSolution::Method::closed_form;
    sol.certified_residual = (aff->M * sol.x_star + aff->offset).norm();
    if (sol.certified_residual > std::max(tol, 1e-9 * (1.0 + aff->offset.norm())))
      throw RunFailure("EmptySolutionSet",
                       "no zero within tolerance; least-squares residual " +
                           num(sol.certified_residual));
    return sol;
  }
  if (!allow_continuation)
    throw ConfigError("Continuation",
                      "operator has no linear representation and continuation is disabled");

  Vec x = Vec::Zero(op.dim());
  double eps = 1.0;
  constexpr int max_rungs = 14;
  for (int k = 0; k < max_rungs; ++k) {
    const TikhonovPoint pt =
        tikhonov_point(op, eps, x, default_point_tol(eps));
    if (k > 0 && (pt.x - x).norm() <= tol) {
      sol.x_star = pt.x;
      sol.method = MinimalNormSolution::Method::continuation;
      sol.certified_residual = op.eval(pt.x).norm();
      return sol;
    }
    x = pt.x;
    eps *= 0.1;
  }
  throw ContinuationStalled("eps ladder exhausted after " + std::to_string(max_rungs) +
                            " rungs without settling to " + num(tol));
}

PathReport path_checks(const ops::MonotoneOperator& op,
                       const dynamics::FlowParams& params,
                       const std::vector<double>& t_grid, double fd_step_rel,
                       double tol) {
  if (t_grid.size() < 2) throw ConfigError("Grid", "need at least 2 grid points");
  for (size_t i = 0; i + 1 < t_grid.size(); ++i)
    if (!(t_grid[i] < t_grid[i + 1]))
      throw ConfigError("Grid", "t_grid must be strictly increasing");
  if (!(fd_step_rel > 0.0)) throw ConfigError("FdStep", "fd_step_rel must be positive");
  if (params.c <= 0.0)
    throw ConfigError("BaselineScale", "path checks need c > 0 (eps(t) vanishes otherwise)");

  const double p = params.tikhonov_exponent();
  const MinimalNormSolution star = minimal_norm_solution(op);

  PathReport report;
  report.norm_xstar = star.x_star.norm();

  Vec warm = Vec::Zero(op.dim());
  double prev_norm = -1.0;
  for (double t : t_grid) {
    const double eps = params.epsilon(t);
    TikhonovPoint pt = tikhonov_point(op, eps, warm, default_point_tol(eps));
    pt.t = t;
    warm = pt.x;

    PathCheckRow row;
    row.t = t;
    row.eps = eps;
    row.norm_xt = pt.x.norm();
    row.residual = pt.residual;
    row.iterations = pt.iterations;

    row.norm_bound_ok = row.norm_xt <= report.norm_xstar * (1.0 + 1e-8) + 1e-14;
    if (!row.norm_bound_ok) ++report.norm_bound_failures;

    const double h = t * fd_step_rel;
    const TikhonovPoint lo = tikhonov_point(op, params.epsilon(t - h), pt.x,
                                            default_point_tol(params.epsilon(t - h)));
    const TikhonovPoint hi = tikhonov_point(op, params.epsilon(t + h), pt.x,
                                            default_point_tol(params.epsilon(t + h)));
    row.fd_derivative_norm = (hi.x - lo.x).norm() / (2.0 * h);
    row.derivative_bound = (p / t) * row.norm_xt;
    row.derivative_bound_ok =
        row.fd_derivative_norm <= row.derivative_bound * (1.0 + tol) + 1e-14;
    if (!row.derivative_bound_ok) ++report.derivative_failures;

    row.monotone_ok =
        prev_norm < 0.0 || row.norm_xt >= prev_norm * (1.0 - tol) - 1e-14;
    if (!row.monotone_ok) ++report.monotonicity_failures;
    prev_norm = row.norm_xt;

    report.rows.push_back(std::move(row));
  }

  const double frac_deriv =
      static_cast<double>(report.derivative_failures) / static_cast<double>(t_grid.size());
  report.derivative_warning = report.derivative_failures > 0 && frac_deriv < 0.01;
  report.pass = report.norm_bound_failures == 0 && report.monotonicity_failures == 0 &&
                (report.derivative_failures == 0 || report.derivative_warning);
  return report;
}

} // namespace tikhoflow::tikhonov
