#ifndef TIKHOFLOW_DIAGNOSTICS_HPP
#define TIKHOFLOW_DIAGNOSTICS_HPP

#include "tikhoflow/dynamics.hpp"
#include "tikhoflow/tikhonov.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace tikhoflow::diagnostics {

/// Constants of the decay estimate behind the convergence proof. All of them
/// are derived from the flow parameters; select_proof_constants picks the
/// canonical values and re-verifies every constraint.
struct ProofConstants {
  double b = 0.0;   // anchoring weight, 0 < b < 2 alpha
  double tau = 0.0; // slack of the Tikhonov-scale bound
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0, s5 = 0.0, s6 = 0.0;
  double K = 0.0;   // exponential-decay rate constant
};

/// Canonical selection: b = alpha, s2 = 1/alpha, tau = half its maximum,
/// s5 = geometric mean of its admissible interval, K = 0.9 of its cap, and
/// s1 = s3 = s4 = s6 = largest 10^{-k} (k = 1..8) for which the dominant
/// coefficient of the quadratic-form discriminant is negative.
/// Throws InfeasibleConstants when no choice works (happens iff
/// alpha * beta <= 1; the decay estimate has no negative-definite regime
/// there, see discriminant_t4q below).
ProofConstants select_proof_constants(const dynamics::FlowParams& params);

/// Exact values of the decay-estimate coefficients at time t, plus the
/// leading-term envelopes used for asymptotic cross-checks.
struct CoefficientValues {
  double t = 0.0;
  double R1 = 0.0, R2 = 0.0, R3 = 0.0, R4 = 0.0, R5 = 0.0;
  double R1_leading_coeff = 0.0; // of t^q
  double R3_leading_coeff = 0.0; // of t^{3q}
  double R4_leading_coeff = 0.0; // of t^{-(q+s)}
  double R5_leading_coeff = 0.0; // of t^{-(q+2s)}
  double R6_leading = 0.0;       // envelope value at t of the |x_t|^2 budget
  /// Dominant-balance heuristic for the discriminant R2^2 - 4 R1 R3 with the
  /// R3 beta-weight dropped (matches discriminant_t4q when beta = 1).
  double discriminant_leading = 0.0;
  /// Exact coefficient of t^{4q} in R2^2 - 4 R1 R3; negativity of this value
  /// is what certification needs asymptotically.
  double discriminant_t4q = 0.0;
};

CoefficientValues coefficients(double t, const dynamics::FlowParams& params,
                               const ProofConstants& consts);

struct ConditionStatus {
  std::string name;
  double last_failure_t = 0.0; // 0 when the condition holds on the whole grid
  double value_at_end = 0.0;
};

struct Certificate {
  bool certified = false;
  double t_star = 0.0; // smallest grid point past which all conditions hold
  std::vector<ConditionStatus> conditions;
  dynamics::FlowParams params;
  ProofConstants consts;
  std::string failure; // empty when certified
};

/// Finds the smallest grid point T* beyond which R1 < 0, R3 < 0,
/// R2^2 - 4 R1 R3 < 0, R4 <= 0 and R5 <= 0 at every sampled t >= T*.
/// The grid must reach at least 10^4.
Certificate certify(const dynamics::FlowParams& params, const ProofConstants& consts,
                    const std::vector<double>& t_grid);

/// Summands of the Lyapunov-type energy at one trajectory sample.
struct EnergyBreakdown {
  double t = 0.0;
  double v = 0.0;              // squared combined-velocity term
  double u = 0.0;              // monotone coupling term (>= 0 up to roundoff)
  double u_identity = 0.0;     // same value via the monotone-gap identity
  double term_operator = 0.0;  // (w^2 beta(t)^2 / 2) |A(x)|^2
  double term_tikhonov = 0.0;  // 2 w^2 eps |x|^2
  double coupling_weight = 0.0;
  double term_anchor = 0.0;    // coupling_weight * |x - x_t|^2
  double E = 0.0;
};

EnergyBreakdown energy(const dynamics::Sample& sample,
                       const tikhonov::TikhonovPoint& x_t,
                       const ops::MonotoneOperator& op,
                       const dynamics::FlowParams& params,
                       const ProofConstants& consts);

struct RateFit {
  std::string quantity;
  double window_lo = 0.0, window_hi = 0.0;
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  double claimed_exponent = 0.0;
  double sup_ratio = 0.0; // max value / t^claimed_exponent over the window
  int n_used = 0;
  int n_zero = 0;      // nonpositive values dropped before the log-log fit
  bool all_zero = false; // rate vacuously satisfied
};

using Series = std::vector<std::pair<double, double>>;

/// Least-squares line on (log t, log value) over the window, plus the sup
/// ratio against t^claimed_exponent. Requires >= 10 samples in the window.
RateFit fit_rate(const Series& samples, double window_lo, double window_hi,
                 double claimed_exponent, const std::string& quantity = "");

/// sup over the window of value / envelope(t); envelope must be positive.
double sup_ratio(const Series& samples, double window_lo, double window_hi,
                 const std::function<double(double)>& envelope);

} // namespace tikhoflow::diagnostics

#endif
