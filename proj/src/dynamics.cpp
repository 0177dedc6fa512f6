#include "tikhoflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tikhoflow::dynamics {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// xd, zd written in place; one operator evaluation per call.
void eval_rhs(double t, const Vec& x, const Vec& z, const ops::MonotoneOperator& op,
              const FlowParams& p, Vec& xd, Vec& zd) {
  const Vec Ax = op.eval(x);
  const double tq = std::pow(t, p.q);
  const double a_coef = p.alpha * p.beta - 1.0 + p.gamma * std::pow(t, -p.s) +
                        p.beta * p.q * std::pow(t, p.q - 1.0);
  const double x_coef = -p.c * std::pow(t, -p.tikhonov_exponent());
  xd = z - p.beta * tq * Ax;
  zd = (-p.alpha / tq) * z + a_coef * Ax + x_coef * x;
}

// Dormand-Prince 5(4) coefficients.
constexpr double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0;
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0,
                 A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0,
                 A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0;
constexpr double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0, A74 = 125.0 / 192.0,
                 A75 = -2187.0 / 6784.0, A76 = 11.0 / 84.0;
// b - bhat (error weights, bhat is the embedded 4th order solution)
constexpr double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0,
                 E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0;

struct Stepper {
  const ops::MonotoneOperator& op;
  const FlowParams& p;
  Tolerances tols;
  IntegratorStats stats;
  int n;

  void f(double t, const Vec& y, Vec& dy) {
    ++stats.rhs_evals;
    Vec xd(n), zd(n);
    eval_rhs(t, y.head(n), y.tail(n), op, p, xd, zd);
    dy.head(n) = xd;
    dy.tail(n) = zd;
  }
};

Sample make_sample(double t, const Vec& x, const Vec& z,
                   const ops::MonotoneOperator& op, const FlowParams& p) {
  Sample s;
  s.t = t;
  s.x = x;
  s.z = z;
  s.Ax = op.eval(x);
  s.xdot = z - p.beta * std::pow(t, p.q) * s.Ax;
  s.norm_x = x.norm();
  s.norm_xdot = s.xdot.norm();
  s.norm_Ax = s.Ax.norm();
  return s;
}

// Cubic Hermite on [t, t+h] from endpoint values and slopes.
Vec hermite(const Vec& y0, const Vec& f0, const Vec& y1, const Vec& f1, double h,
            double theta) {
  const double t2 = theta * theta, t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

} // namespace

double FlowParams::epsilon(double t) const {
  if (c == 0.0) return 0.0;
  return c * std::pow(t, -tikhonov_exponent());
}

FlowParams validate_params(const FlowParams& raw, std::string* warning) {
  const double vals[] = {raw.alpha, raw.q, raw.s, raw.beta, raw.gamma, raw.c, raw.t0};
  for (double v : vals)
    if (!std::isfinite(v)) throw ConfigError("NonFiniteParam", "parameters must be finite");

  if (raw.alpha <= 1.0)
    throw AlphaTooSmall("alpha = " + num(raw.alpha) + ", need alpha > 1");
  if (raw.q <= 0.0 || raw.s <= 0.0)
    throw ExponentRange("q = " + num(raw.q) + ", s = " + num(raw.s) + ", need q, s > 0");
  const double r = raw.q + raw.s;
  if (!(r > 0.0 && r < 1.0))
    throw ExponentRange("q + s = " + num(r) + ", need 0 < q + s < 1");
  if (raw.beta <= 0.0) throw NonPositive("beta = " + num(raw.beta));
  if (raw.gamma <= 0.0) throw NonPositive("gamma = " + num(raw.gamma));
  if (raw.t0 <= 0.0) throw NonPositive("t0 = " + num(raw.t0));

  if (raw.baseline) {
    if (raw.c != 0.0)
      throw ConfigError("BaselineScale", "baseline mode requires c = 0, got " + num(raw.c));
  } else {
    if (raw.c <= 0.0) throw NonPositive("c = " + num(raw.c) + " (c = 0 needs baseline mode)");
    const double bound = raw.tikhonov_scale_bound();
    if (raw.c >= bound)
      throw TikhonovBound("c = " + num(raw.c) + " must be below " + num(bound));
  }

  if (warning) {
    warning->clear();
    if (std::pow(raw.t0, raw.s) <= raw.gamma)
      *warning = "coefficient 1 - gamma/t^s is nonpositive at t0 = " + num(raw.t0) +
                 "; it turns positive at t = " + num(std::pow(raw.gamma, 1.0 / raw.s));
  }
  return raw;
}

std::pair<Vec, Vec> rhs(double t, const FlowState& state,
                        const ops::MonotoneOperator& op, const FlowParams& params) {
  if (t < params.t0)
    throw ConfigError("TimeRange", "t = " + num(t) + " below t0 = " + num(params.t0));
  if (state.x.size() != op.dim() || state.z.size() != op.dim())
    throw DimensionMismatch("flow state does not match operator dimension");
  Vec xd(op.dim()), zd(op.dim());
  eval_rhs(t, state.x, state.z, op, params, xd, zd);
  if (!all_finite(xd) || !all_finite(zd))
    throw NonFiniteOutput("rhs produced NaN/Inf at t = " + num(t));
  return {std::move(xd), std::move(zd)};
}

Trajectory integrate_state(const ops::MonotoneOperator& op, const FlowParams& params,
                           const Vec& x0, const Vec& z0,
                           const std::vector<double>& schedule, Tolerances tols,
                           bool land_exactly) {
  const int n = op.dim();
  if (x0.size() != n || z0.size() != n)
    throw DimensionMismatch("initial state does not match operator dimension");
  if (!all_finite(x0) || !all_finite(z0))
    throw NonFiniteState("initial state has NaN/Inf");
  if (!(tols.rel > 0.0) || !(tols.abs > 0.0))
    throw ConfigError("Tolerance", "tolerances must be positive");
  if (schedule.empty()) throw ConfigError("Schedule", "schedule is empty");
  for (size_t i = 0; i + 1 < schedule.size(); ++i)
    if (!(schedule[i] < schedule[i + 1]))
      throw ConfigError("Schedule", "schedule must be strictly increasing");
  if (schedule.front() < params.t0)
    throw ConfigError("Schedule", "schedule starts before t0");

  Trajectory traj;
  traj.params = params;
  traj.tols = tols;

  Stepper st{op, params, tols, IntegratorStats{}, n};

  const double t_end = schedule.back();
  double t = params.t0;
  Vec y(2 * n);
  y.head(n) = x0;
  y.tail(n) = z0;

  traj.samples.push_back(make_sample(t, x0, z0, op, params));
  size_t next = 0;
  if (schedule[next] == t) ++next;

  Vec k1(2 * n), k2(2 * n), k3(2 * n), k4(2 * n), k5(2 * n), k6(2 * n), k7(2 * n);
  Vec ytmp(2 * n), y5(2 * n), err_vec(2 * n);
  st.f(t, y, k1);

  // initial step size (rough two-stage estimate)
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < 2 * n; ++i) {
      const double sc = tols.abs + tols.rel * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / (2 * n));
    d1 = std::sqrt(d1 / (2 * n));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, 0.2 * t, t_end - t});
    ytmp = y + h0 * k1;
    st.f(t + h0, ytmp, k2);
    double d2 = 0.0;
    for (int i = 0; i < 2 * n; ++i) {
      const double sc = tols.abs + tols.rel * std::abs(y[i]);
      d2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
    }
    d2 = std::sqrt(d2 / (2 * n)) / h0;
    const double der = std::max(d1, d2);
    const double h1 = der <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                   : std::pow(0.01 / der, 0.2);
    h = std::min({100.0 * h0, h1, 0.5 * t, t_end - t});
  }

  constexpr double SAFE = 0.9, BETA_PI = 0.04, EXPO1 = 0.2 - BETA_PI * 0.75;
  constexpr double FACC1 = 5.0, FACC2 = 0.1; // step scale bounds 1/0.2 and 1/10
  double facold = 1e-4;
  bool rejected_last = false;
  int nonfinite_streak = 0;
  const long max_steps = 200000000L;

  while (t < t_end) {
    if (st.stats.steps + st.stats.rejections > max_steps)
      throw RunFailure("IntegrationStalled",
                       "step budget exhausted at t = " + num(t));
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(t, 1.0);
    double h_try = std::min({h, 0.5 * t, t_end - t});
    if (land_exactly && next < schedule.size() &&
        t + 1.05 * h_try >= schedule[next])
      h_try = schedule[next] - t;
    if (h_try < hmin)
      throw StepSizeUnderflow("step collapsed to " + num(h_try) + " at t = " + num(t) +
                                  " (last good state kept at that time)",
                              t);

    bool finite_ok = true;
    double err = 0.0;
    try {
      ytmp = y + h_try * (A21 * k1);
      st.f(t + C2 * h_try, ytmp, k2);
      ytmp = y + h_try * (A31 * k1 + A32 * k2);
      st.f(t + C3 * h_try, ytmp, k3);
      ytmp = y + h_try * (A41 * k1 + A42 * k2 + A43 * k3);
      st.f(t + C4 * h_try, ytmp, k4);
      ytmp = y + h_try * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4);
      st.f(t + C5 * h_try, ytmp, k5);
      ytmp = y + h_try * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5);
      st.f(t + h_try, ytmp, k6);
      y5 = y + h_try * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
      st.f(t + h_try, y5, k7);
      err_vec = h_try * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
      double acc = 0.0;
      for (int i = 0; i < 2 * n; ++i) {
        const double sc =
            tols.abs + tols.rel * std::max(std::abs(y[i]), std::abs(y5[i]));
        acc += (err_vec[i] / sc) * (err_vec[i] / sc);
      }
      err = std::sqrt(acc / (2 * n));
      if (!std::isfinite(err)) finite_ok = false;
    } catch (const NonFiniteOutput&) {
      finite_ok = false;
    }

    if (!finite_ok) {
      if (++nonfinite_streak > 60)
        throw NonFiniteState("state blew up near t = " + num(t));
      h = 0.2 * h_try;
      rejected_last = true;
      ++st.stats.rejections;
      continue;
    }
    nonfinite_streak = 0;

    const double fac11 = std::pow(err, EXPO1);
    if (err <= 1.0) {
      // accepted
      const double t_new = t + h_try;
      while (next < schedule.size() &&
             schedule[next] <= t_new * (1.0 + 4e-16) + 4e-300) {
        const double ts = schedule[next];
        if (std::abs(ts - t_new) <= 4e-16 * std::max(std::abs(ts), 1.0)) {
          traj.samples.push_back(make_sample(ts, y5.head(n), y5.tail(n), op, params));
        } else {
          const double theta = (ts - t) / h_try;
          const Vec ys = hermite(y, k1, y5, k7, h_try, theta);
          traj.samples.push_back(make_sample(ts, ys.head(n), ys.tail(n), op, params));
        }
        ++next;
      }
      facold = std::max(err, 1e-4);
      double fac = fac11 / std::pow(facold, BETA_PI);
      fac = std::max(FACC2, std::min(FACC1, fac / SAFE));
      double hnew = h_try / fac;
      if (rejected_last) hnew = std::min(hnew, h_try);
      h = hnew;
      t = t_new;
      y.swap(y5);
      k1.swap(k7); // FSAL
      rejected_last = false;
      ++st.stats.steps;
    } else {
      h = h_try / std::min(FACC1, fac11 / SAFE);
      rejected_last = true;
      ++st.stats.rejections;
    }
  }

  traj.stats = st.stats;
  return traj;
}

Trajectory integrate(const ops::MonotoneOperator& op, const FlowParams& params,
                     const Vec& u0, const Vec& v0,
                     const std::vector<double>& schedule, Tolerances tols,
                     bool land_exactly) {
  if (u0.size() != op.dim() || v0.size() != op.dim())
    throw DimensionMismatch("initial conditions do not match operator dimension");
  const Vec z0 = v0 + params.beta * std::pow(params.t0, params.q) * op.eval(u0);
  return integrate_state(op, params, u0, z0, schedule, tols, land_exactly);
}

std::vector<ResidualPoint> ds_residual(const Trajectory& traj,
                                       const ops::MonotoneOperator& op,
                                       const FlowParams& params, double stencil) {
  if (traj.samples.size() < 3)
    throw InsufficientSamples("need at least 3 samples, have " +
                              std::to_string(traj.samples.size()));
  if (!(stencil > 0.0)) throw ConfigError("Stencil", "stencil width must be positive");

  std::vector<double> checkpoints;
  for (size_t i = 1; i + 1 < traj.samples.size(); ++i) {
    const double t = traj.samples[i].t;
    if (t - stencil > params.t0 * (1.0 + 1e-12)) checkpoints.push_back(t);
  }
  if (checkpoints.empty())
    throw InsufficientSamples("no interior checkpoint admits the stencil width");

  std::vector<double> times;
  times.reserve(3 * checkpoints.size());
  for (double t : checkpoints) {
    times.push_back(t - stencil);
    times.push_back(t);
    times.push_back(t + stencil);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const Trajectory aux = integrate_state(op, params, traj.samples.front().x,
                                         traj.samples.front().z, times, traj.tols,
                                         /*land_exactly=*/true);

  auto sample_at = [&aux](double t) -> const Sample& {
    auto it = std::lower_bound(aux.samples.begin(), aux.samples.end(), t,
                               [](const Sample& s, double v) { return s.t < v; });
    if (it == aux.samples.end() || std::abs(it->t - t) > 1e-9 * std::max(t, 1.0))
      throw RunFailure("StencilLookup", "auxiliary sample missing at t = " + num(t));
    return *it;
  };

  std::vector<ResidualPoint> out;
  out.reserve(checkpoints.size());
  for (double t : checkpoints) {
    const Sample& lo = sample_at(t - stencil);
    const Sample& mid = sample_at(t);
    const Sample& hi = sample_at(t + stencil);
    const Vec xdd = (hi.xdot - lo.xdot) / (2.0 * stencil);
    const Vec dAdt = (hi.Ax - lo.Ax) / (2.0 * stencil);
    const double tq = std::pow(t, params.q);
    const Vec defect = xdd + (params.alpha / tq) * mid.xdot +
                       params.beta * tq * dAdt +
                       (1.0 - params.gamma * std::pow(t, -params.s)) * mid.Ax +
                       params.epsilon(t) * mid.x;
    out.push_back({t, defect.norm(), dAdt.dot(mid.xdot)});
  }
  return out;
}

std::vector<double> log_schedule(double t0, double t_end, int points_per_decade) {
  return log_spaced(t0, t_end, points_per_decade);
}

} // namespace tikhoflow::dynamics
