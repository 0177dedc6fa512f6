#include "tikhoflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tikhoflow::diagnostics {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double r1_factor(double alpha, const ProofConstants& k) {
  return (2.0 + k.s3 + k.s5) * k.b - 4.0 * alpha;
}

double r3_factor(const ProofConstants& k) {
  return -2.0 + k.s1 + k.b * k.s4 + k.K * k.s6 * k.b / 2.0;
}

double disc_paper(double alpha, double beta, const ProofConstants& k) {
  const double head = (2.0 * k.b - 2.0 * alpha) * beta - 4.0;
  return head * head - 4.0 * r1_factor(alpha, k) * r3_factor(k);
}

double disc_t4q(double alpha, double beta, const ProofConstants& k) {
  const double head = (2.0 * k.b - 2.0 * alpha) * beta - 4.0;
  return head * head - 4.0 * r1_factor(alpha, k) * r3_factor(k) * beta;
}

} // namespace

ProofConstants select_proof_constants(const dynamics::FlowParams& p) {
  if (!(p.c > 0.0))
    throw ConfigError("BaselineScale", "proof constants need c > 0");
  const double a = p.alpha, beta = p.beta, g = p.gamma, c = p.c;

  ProofConstants k;
  k.b = a;
  k.s2 = 1.0 / a;

  const double denom = a * a * beta * beta + 8.0 * (a - 1.0) * beta;
  const double tau_max = a * g - c * denom / (8.0 * (a - 1.0));
  if (!(tau_max > 0.0))
    throw InfeasibleConstants("tau interval empty (c too close to its bound)");
  k.tau = 0.5 * tau_max;

  const double gap = (a * g - k.tau) / c - beta;
  if (!(gap > 0.0))
    throw InfeasibleConstants("slack (alpha gamma - tau)/c - beta is nonpositive");
  const double s5_lo = a * beta * beta / (4.0 * gap);
  const double s5_hi = 2.0 * (a - 1.0) / a;
  if (!(s5_lo < s5_hi))
    throw InfeasibleConstants("s5 interval (" + num(s5_lo) + ", " + num(s5_hi) +
                              ") is empty");
  k.s5 = std::sqrt(s5_lo * s5_hi);

  const double k_cap = std::min(2.0 * k.tau / (4.0 + a * beta), 2.0 * c / (3.0 * a));
  k.K = 0.9 * k_cap;

  bool found = false;
  for (int e = 1; e <= 8; ++e) {
    const double delta = std::pow(10.0, -e);
    k.s1 = k.s3 = k.s4 = k.s6 = delta;
    if (disc_t4q(a, beta, k) < 0.0 && r1_factor(a, k) < 0.0 && r3_factor(k) < 0.0) {
      found = true;
      break;
    }
  }
  if (!found)
    throw InfeasibleConstants(
        "no delta in {1e-1..1e-8} makes the discriminant coefficient negative "
        "(alpha*beta = " +
        num(a * beta) + "; the negative-definite regime needs alpha*beta > 1)");

  // re-verify every constraint the estimate relies on
  const bool ok = k.b > 0.0 && k.b < 2.0 * a && k.s2 == 1.0 / a && k.tau > 0.0 &&
                  c < 8.0 * (a - 1.0) * (a * g - k.tau) / denom && s5_lo < k.s5 &&
                  k.s5 < s5_hi && k.K > 0.0 && k.K < k_cap && k.s1 > 0.0 &&
                  k.s3 > 0.0 && k.s4 > 0.0 && k.s6 > 0.0;
  if (!ok) throw InfeasibleConstants("post-hoc constraint verification failed");
  return k;
}

CoefficientValues coefficients(double t, const dynamics::FlowParams& p,
                               const ProofConstants& k) {
  const double a = p.alpha, beta = p.beta, g = p.gamma, c = p.c, q = p.q, s = p.s;
  const double r = p.coupling_exponent();
  const double pe = p.tikhonov_exponent();

  const double w = std::pow(t, q);           // weight t^q
  const double wd = q * std::pow(t, q - 1.0);
  const double wdd = q * (q - 1.0) * std::pow(t, q - 2.0);
  const double bt = beta * w;                // beta(t)
  const double btd = beta * wd;
  const double gt = 1.0 - g * std::pow(t, -s);
  const double eps = p.epsilon(t);
  const double epsd = -pe * c * std::pow(t, -pe - 1.0);
  const double tr = std::pow(t, r);

  CoefficientValues v;
  v.t = t;

  v.R1 = (2.0 * k.b + k.s3 * k.b + k.s5 * k.b + 4.0 * wd - 4.0 * a +
          8.0 * k.K * w / tr) *
         w;
  v.R2 = (2.0 * k.b + 2.0 * wd - 2.0 * a) * w * bt +
         2.0 * (wd * bt + w * btd - 2.0 * w * gt) * w;
  v.R3 = (2.0 * wd * bt + 2.0 * w * btd - 2.0 * w * gt + k.s1 * w + k.b * k.s4 * w) *
             w * bt +
         k.K * ((k.s6 * k.b * tr + 5.0 * bt) / (2.0 * tr)) * w * w * bt;

  const double wbt_d = wd * bt + w * btd; // (w beta(t))'
  v.R4 = k.b * ((a - wd) * k.s2 - 1.0) * w * eps - k.b * wdd +
         (k.b * (wbt_d - w * gt) - w * w * bt * eps) * eps +
         k.K * (k.b * (2.0 * a + k.b - 2.0 * wd) / (2.0 * tr) +
                k.b * bt / (2.0 * k.s6 * tr * tr));

  const double d_2w2eps = 2.0 * (2.0 * w * wd * eps + w * w * epsd); // (2 w^2 eps)'
  const double d_bwbteps =
      k.b * (wd * bt * eps + w * btd * eps + w * bt * epsd); // (b w beta eps)'
  v.R5 = d_2w2eps + 0.5 * d_bwbteps + k.b * w * bt * bt * eps * eps / (4.0 * k.s5) -
         k.b * w * eps - (k.b * (wbt_d - w * gt) - w * w * bt * eps) * eps +
         k.K * (2.0 * w * w * eps / tr + k.b * w * bt * eps / (2.0 * tr));

  v.R1_leading_coeff = r1_factor(a, k);
  v.R3_leading_coeff = r3_factor(k) * beta;
  v.R4_leading_coeff = k.b * (a * k.s2 - 2.0) * c + k.K * k.b * (2.0 * a + k.b) / 2.0;
  v.R5_leading_coeff = -k.b * g * c + (k.b * beta * beta / (4.0 * k.s5) + beta) * c * c +
                       k.K * c * (4.0 + k.b * beta) / 2.0;
  v.R6_leading =
      c > 0.0
          ? (k.b * a * pe * pe / (k.s2 * c)) * std::pow(t, q + s - 2.0) +
                (beta * (1.0 / k.s1 - 1.0) * c * c + k.b * g * c -
                 k.b * k.K * beta * c / 2.0) *
                    std::pow(t, -q - 2.0 * s)
          : 0.0;
  v.discriminant_leading = disc_paper(a, beta, k);
  v.discriminant_t4q = disc_t4q(a, beta, k);
  return v;
}

Certificate certify(const dynamics::FlowParams& params, const ProofConstants& consts,
                    const std::vector<double>& t_grid) {
  if (t_grid.size() < 2) throw ConfigError("Grid", "need at least 2 grid points");
  for (size_t i = 0; i + 1 < t_grid.size(); ++i)
    if (!(t_grid[i] < t_grid[i + 1]))
      throw ConfigError("Grid", "t_grid must be strictly increasing");
  if (t_grid.back() < 1e4)
    throw ConfigError("Grid", "certification grid must reach 1e4, ends at " +
                                  num(t_grid.back()));

  constexpr int n_cond = 5;
  const char* names[n_cond] = {"R1 < 0", "R3 < 0", "R2^2 - 4 R1 R3 < 0", "R4 <= 0",
                               "R5 <= 0"};

  Certificate cert;
  cert.params = params;
  cert.consts = consts;
  cert.conditions.resize(n_cond);
  for (int j = 0; j < n_cond; ++j) cert.conditions[j].name = names[j];

  size_t first_ok = 0; // index from which all later points satisfy everything
  for (size_t i = 0; i < t_grid.size(); ++i) {
    const CoefficientValues v = coefficients(t_grid[i], params, consts);
    const double disc = v.R2 * v.R2 - 4.0 * v.R1 * v.R3;
    const double vals[n_cond] = {v.R1, v.R3, disc, v.R4, v.R5};
    const bool ok[n_cond] = {vals[0] < 0.0, vals[1] < 0.0, vals[2] < 0.0,
                             vals[3] <= 0.0, vals[4] <= 0.0};
    for (int j = 0; j < n_cond; ++j) {
      cert.conditions[j].value_at_end = vals[j];
      if (!ok[j]) {
        cert.conditions[j].last_failure_t = t_grid[i];
        first_ok = i + 1;
      }
    }
  }

  if (first_ok >= t_grid.size()) {
    cert.certified = false;
    cert.t_star = 0.0;
    std::string worst;
    for (const auto& cond : cert.conditions)
      if (cond.last_failure_t == t_grid.back())
        worst += (worst.empty() ? "" : ", ") + cond.name;
    cert.failure = "violated at the end of the grid: " + worst;
  } else {
    cert.certified = true;
    cert.t_star = t_grid[first_ok];
  }
  return cert;
}

EnergyBreakdown energy(const dynamics::Sample& sample,
                       const tikhonov::TikhonovPoint& x_t,
                       const ops::MonotoneOperator& op,
                       const dynamics::FlowParams& p, const ProofConstants& k) {
  if (sample.x.size() != x_t.x.size())
    throw DimensionMismatch("sample and regularized point dimensions differ");
  const double t = sample.t;
  const double w = std::pow(t, p.q);
  const double wd = p.q * std::pow(t, p.q - 1.0);
  const double bt = p.beta * w;
  const double eps = p.epsilon(t);

  const Vec& x = sample.x;
  const Vec& Ax = sample.Ax;
  const Vec diff = x - x_t.x;

  EnergyBreakdown e;
  e.t = t;
  e.v = 0.5 * (k.b * diff + w * (2.0 * sample.xdot + bt * Ax)).squaredNorm();
  e.u = k.b * w * bt * Ax.dot(diff) +
        0.5 * k.b * w * bt * eps *
            (x.squaredNorm() - diff.squaredNorm() - x_t.x.squaredNorm());
  const Vec Axt = op.eval(x_t.x);
  e.u_identity = k.b * w * bt * ((Ax + eps * x) - (Axt + eps * x_t.x)).dot(diff) -
                 k.b * w * bt * eps * diff.squaredNorm();
  e.term_operator = 0.5 * w * w * bt * bt * Ax.squaredNorm();
  e.term_tikhonov = 2.0 * w * w * eps * x.squaredNorm();
  e.coupling_weight = 0.5 * k.b * (2.0 * p.alpha - k.b - 2.0 * wd + w * bt * eps);
  e.term_anchor = e.coupling_weight * diff.squaredNorm();
  e.E = e.v + e.u + e.term_operator + e.term_tikhonov + e.term_anchor;
  return e;
}

RateFit fit_rate(const Series& samples, double window_lo, double window_hi,
                 double claimed_exponent, const std::string& quantity) {
  if (!(window_lo < window_hi)) throw EmptyWindow("window_lo must be below window_hi");

  std::vector<std::pair<double, double>> in_window;
  for (const auto& [t, v] : samples)
    if (t >= window_lo && t <= window_hi) in_window.push_back({t, v});
  if (in_window.size() < 10)
    throw EmptyWindow("only " + std::to_string(in_window.size()) +
                      " samples in [" + num(window_lo) + ", " + num(window_hi) +
                      "], need 10");

  RateFit fit;
  fit.quantity = quantity;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.claimed_exponent = claimed_exponent;

  double sup = 0.0;
  std::vector<std::pair<double, double>> logs;
  for (const auto& [t, v] : in_window) {
    sup = std::max(sup, v / std::pow(t, claimed_exponent));
    if (v > 0.0)
      logs.push_back({std::log(t), std::log(v)});
    else
      ++fit.n_zero;
  }
  fit.sup_ratio = sup;
  fit.n_used = static_cast<int>(logs.size());

  if (logs.empty()) {
    fit.all_zero = true;
    fit.r2 = 1.0;
    return fit;
  }

  double mx = 0.0, my = 0.0;
  for (const auto& [lx, ly] : logs) {
    mx += lx;
    my += ly;
  }
  mx /= logs.size();
  my /= logs.size();
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (const auto& [lx, ly] : logs) {
      const double e = ly - (fit.intercept + fit.slope * lx);
      ss_res += e * e;
    }
    fit.r2 = 1.0 - ss_res / syy;
  } else {
    fit.r2 = 1.0;
  }
  return fit;
}

double sup_ratio(const Series& samples, double window_lo, double window_hi,
                 const std::function<double(double)>& envelope) {
  double sup = 0.0;
  bool any = false;
  for (const auto& [t, v] : samples)
    if (t >= window_lo && t <= window_hi) {
      sup = std::max(sup, v / envelope(t));
      any = true;
    }
  if (!any) throw EmptyWindow("no samples in [" + num(window_lo) + ", " +
                              num(window_hi) + "]");
  return sup;
}

} // namespace tikhoflow::diagnostics
