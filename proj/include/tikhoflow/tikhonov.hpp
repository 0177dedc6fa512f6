#ifndef TIKHOFLOW_TIKHONOV_HPP
#define TIKHOFLOW_TIKHONOV_HPP

#include "tikhoflow/dynamics.hpp"
#include "tikhoflow/operators.hpp"

#include <vector>

namespace tikhoflow::tikhonov {

/// eps(t) = c / t^{2q+s}.
double epsilon(double t, const dynamics::FlowParams& params);

/// Solution of A(x) + eps x = 0 plus solver metadata.
struct TikhonovPoint {
  double t = 0.0; // 0 when the point was requested by eps directly
  double eps = 0.0;
  Vec x;
  double residual = 0.0;
  long iterations = 0;
};

/// Solves A(x) + eps x = 0 to residual norm <= tol. Operators with a linear
/// representation use a direct dense solve of (M + eps I) x = -offset; others
/// run a damped fixed-point iteration x <- x - lambda (A(x) + eps x) with
/// residual backtracking (halve lambda until the residual decreases, grow it
/// again after accepted steps), warm-started from `warm`.
TikhonovPoint tikhonov_point(const ops::MonotoneOperator& op, double eps,
                             const Vec& warm, double tol,
                             long max_iterations = 50'000'000);

/// Default solver tolerance ladder; keeps path errors below rate-measurement
/// noise.
inline double default_point_tol(double eps) { return std::min(1e-10, eps * 1e-4); }

struct MinimalNormSolution {
  enum class Method { closed_form, continuation };
  Vec x_star;
  Method method = Method::closed_form;
  double certified_residual = 0.0;
};

/// Minimal-norm zero of A. Linear representation: least-norm solution of
/// M x = -offset (complete orthogonal decomposition). Otherwise: continuation
/// down a decreasing eps ladder (factor 10 per rung) until successive points
/// differ by at most `tol`.
MinimalNormSolution minimal_norm_solution(const ops::MonotoneOperator& op,
                                          double tol = 1e-8,
                                          bool allow_continuation = true);

struct PathCheckRow {
  double t = 0.0;
  double eps = 0.0;
  double norm_xt = 0.0;
  double residual = 0.0;
  long iterations = 0;
  bool norm_bound_ok = true;       // |x_t| <= |x*| (relative tolerance)
  bool derivative_bound_ok = true; // FD |d/dt x_t| <= (p/t) |x_t|
  bool monotone_ok = true;         // |x_t| nondecreasing along the grid
  double fd_derivative_norm = 0.0;
  double derivative_bound = 0.0;
};

struct PathReport {
  std::vector<PathCheckRow> rows;
  double norm_xstar = 0.0;
  int norm_bound_failures = 0;
  int derivative_failures = 0;
  int monotonicity_failures = 0;
  bool pass = false;
  /// Derivative-bound failures at under 1% of grid points downgrade to a
  /// warning (the bound holds almost everywhere, not pointwise).
  bool derivative_warning = false;
};

/// Evaluates the regularization path on t_grid and checks the norm bound, the
/// FD path-derivative bound with relative stencil h = t * fd_step_rel, and
/// monotonicity of |x_t|.
PathReport path_checks(const ops::MonotoneOperator& op,
                       const dynamics::FlowParams& params,
                       const std::vector<double>& t_grid,
                       double fd_step_rel = 1e-4, double tol = 1e-6);

} // namespace tikhoflow::tikhonov

#endif
