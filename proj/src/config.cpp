#include "tikhoflow/config.hpp"

#include "tikhoflow/csv.hpp"
#include "tikhoflow/problems.hpp"
#include "tikhoflow/svg.hpp"
#include "tikhoflow/tikhonov.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace tikhoflow::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- toml value

const std::string& TomlValue::as_string() const {
  if (!is_string()) throw ParseError("expected a string value");
  return std::get<std::string>(v_);
}
double TomlValue::as_number() const {
  if (!is_number()) throw ParseError("expected a numeric value");
  return std::get<double>(v_);
}
bool TomlValue::as_bool() const {
  if (!is_bool()) throw ParseError("expected a boolean value");
  return std::get<bool>(v_);
}
const TomlArray& TomlValue::as_array() const {
  if (!is_array()) throw ParseError("expected an array value");
  return std::get<TomlArray>(v_);
}

// --------------------------------------------------------------- toml parser

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char next() {
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(line) + ": " + what);
  }

  void skip_ws_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) next();
  }
  void skip_ws_and_comments(bool cross_lines) {
    for (;;) {
      skip_ws_inline();
      if (eof()) return;
      if (peek() == '#') {
        while (!eof() && peek() != '\n') next();
        continue;
      }
      if (cross_lines && (peek() == '\n' || peek() == '\r')) {
        next();
        continue;
      }
      return;
    }
  }
};

TomlValue parse_value(Cursor& c);

TomlValue parse_array(Cursor& c) {
  c.next(); // consume '['
  TomlArray items;
  for (;;) {
    c.skip_ws_and_comments(true);
    if (c.eof()) c.fail("unterminated array");
    if (c.peek() == ']') {
      c.next();
      return TomlValue(std::move(items));
    }
    items.push_back(parse_value(c));
    c.skip_ws_and_comments(true);
    if (c.eof()) c.fail("unterminated array");
    if (c.peek() == ',') {
      c.next();
      continue;
    }
    if (c.peek() == ']') {
      c.next();
      return TomlValue(std::move(items));
    }
    c.fail("expected ',' or ']' in array");
  }
}

TomlValue parse_value(Cursor& c) {
  c.skip_ws_inline();
  if (c.eof()) c.fail("expected a value");
  const char ch = c.peek();
  if (ch == '[') return parse_array(c);
  if (ch == '"') {
    c.next();
    std::string s;
    while (!c.eof() && c.peek() != '"') {
      char k = c.next();
      if (k == '\\' && !c.eof()) {
        const char e = c.next();
        switch (e) {
          case 'n': k = '\n'; break;
          case 't': k = '\t'; break;
          case '"': k = '"'; break;
          case '\\': k = '\\'; break;
          default: c.fail(std::string("bad escape \\") + e);
        }
      }
      s += k;
    }
    if (c.eof()) c.fail("unterminated string");
    c.next();
    return TomlValue(std::move(s));
  }
  // bare token: bool or number
  std::string tok;
  while (!c.eof() && c.peek() != ',' && c.peek() != ']' && c.peek() != '\n' &&
         c.peek() != '\r' && c.peek() != '#' && c.peek() != ' ' && c.peek() != '\t')
    tok += c.next();
  if (tok == "true") return TomlValue(true);
  if (tok == "false") return TomlValue(false);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') c.fail("bad value '" + tok + "'");
  return TomlValue(v);
}

} // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  Cursor c{text};
  std::string section;
  while (true) {
    c.skip_ws_and_comments(true);
    if (c.eof()) break;
    if (c.peek() == '[') {
      c.next();
      std::string name;
      while (!c.eof() && c.peek() != ']' && c.peek() != '\n') name += c.next();
      if (c.eof() || c.peek() != ']') c.fail("unterminated section header");
      c.next();
      section = name;
      continue;
    }
    std::string key;
    while (!c.eof() && (std::isalnum(static_cast<unsigned char>(c.peek())) ||
                        c.peek() == '_' || c.peek() == '-' || c.peek() == '.'))
      key += c.next();
    if (key.empty()) c.fail("expected a key");
    c.skip_ws_inline();
    if (c.eof() || c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
    c.next();
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.count(full)) c.fail("duplicate key '" + full + "'");
    table.emplace(full, parse_value(c));
    c.skip_ws_and_comments(false);
    if (!c.eof() && c.peek() != '\n' && c.peek() != '\r')
      c.fail("trailing characters after value of '" + full + "'");
  }
  return table;
}

// ------------------------------------------------------------ config loading

namespace {

Vec vec_from(const TomlValue& v) {
  const auto& arr = v.as_array();
  Vec out(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) out[static_cast<long>(i)] = arr[i].as_number();
  return out;
}

Mat mat_from(const TomlValue& v) {
  const auto& rows = v.as_array();
  if (rows.empty()) throw ParseError("matrix must have at least one row");
  const size_t ncols = rows[0].as_array().size();
  Mat out(rows.size(), ncols);
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i].as_array();
    if (row.size() != ncols) throw ParseError("ragged matrix in config");
    for (size_t j = 0; j < ncols; ++j)
      out(static_cast<long>(i), static_cast<long>(j)) = row[j].as_number();
  }
  return out;
}

double get_num(const TomlTable& t, const std::string& key, double fallback) {
  auto it = t.find(key);
  return it == t.end() ? fallback : it->second.as_number();
}

bool get_bool(const TomlTable& t, const std::string& key, bool fallback) {
  auto it = t.find(key);
  return it == t.end() ? fallback : it->second.as_bool();
}

std::string toml_vec(const Vec& v) {
  std::string s = "[";
  for (long i = 0; i < v.size(); ++i)
    s += (i ? ", " : "") + csv::format17(v[i]);
  return s + "]";
}

std::string toml_mat(const Mat& m) {
  std::string s = "[";
  for (long i = 0; i < m.rows(); ++i) {
    s += i ? ", [" : "[";
    for (long j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + csv::format17(m(i, j));
    s += "]";
  }
  return s + "]";
}

} // namespace

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("FileNotFound", path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  TomlTable t;
  try {
    t = parse_toml(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  ExperimentConfig cfg;
  if (auto it = t.find("problem.builtin"); it != t.end())
    cfg.problem_builtin = it->second.as_string();
  if (auto it = t.find("problem.file"); it != t.end()) {
    fs::path p = it->second.as_string();
    if (p.is_relative()) p = path.parent_path() / p;
    cfg.problem_file = p.string();
  }
  if (auto it = t.find("problem.M"); it != t.end()) cfg.inline_M = mat_from(it->second);
  if (auto it = t.find("problem.a"); it != t.end()) cfg.inline_a = vec_from(it->second);
  if (auto it = t.find("problem.Q"); it != t.end()) cfg.qp_Q = mat_from(it->second);
  if (auto it = t.find("problem.q"); it != t.end()) cfg.qp_q = vec_from(it->second);
  if (auto it = t.find("problem.B"); it != t.end()) cfg.qp_B = mat_from(it->second);
  if (auto it = t.find("problem.b"); it != t.end()) cfg.qp_b = vec_from(it->second);
  const int sources = (!cfg.problem_builtin.empty()) + (!cfg.problem_file.empty()) +
                      (cfg.inline_M.has_value()) + (cfg.qp_Q.has_value());
  if (sources != 1)
    throw ConfigError("ProblemSource",
                      "config must name exactly one of problem.builtin, problem.file, "
                      "inline problem.M/problem.a, or problem.Q/problem.B/problem.b");
  if (cfg.inline_M && !cfg.inline_a)
    throw ConfigError("ProblemSource", "inline problem needs problem.a");
  if (cfg.qp_Q) {
    if (!cfg.qp_B || !cfg.qp_b)
      throw ConfigError("ProblemSource", "constrained problem needs problem.B and problem.b");
    if (!cfg.qp_q) cfg.qp_q = Vec::Zero(cfg.qp_Q->rows());
  }

  cfg.params.alpha = get_num(t, "flow.alpha", cfg.params.alpha);
  cfg.params.q = get_num(t, "flow.q", cfg.params.q);
  cfg.params.s = get_num(t, "flow.s", cfg.params.s);
  cfg.params.beta = get_num(t, "flow.beta", cfg.params.beta);
  cfg.params.gamma = get_num(t, "flow.gamma", cfg.params.gamma);
  cfg.params.c = get_num(t, "flow.c", cfg.params.c);
  cfg.params.t0 = get_num(t, "flow.t0", cfg.params.t0);
  cfg.params.baseline = get_bool(t, "flow.baseline", false);

  if (auto it = t.find("init.u0"); it != t.end()) {
    if (it->second.is_string()) {
      if (it->second.as_string() != "random")
        throw ConfigError("InitSpec", "init.u0 must be an array or \"random\"");
    } else {
      cfg.u0 = vec_from(it->second);
    }
  }
  if (auto it = t.find("init.v0"); it != t.end()) cfg.v0 = vec_from(it->second);
  cfg.u0_scale = get_num(t, "init.scale", 1.0);

  cfg.schedule.t_end = get_num(t, "schedule.t_end", cfg.schedule.t_end);
  cfg.schedule.points_per_decade =
      static_cast<int>(get_num(t, "schedule.points_per_decade", 200));
  cfg.tols.rel = get_num(t, "integrator.rel_tol", cfg.tols.rel);
  cfg.tols.abs = get_num(t, "integrator.abs_tol", cfg.tols.abs);

  cfg.checks.rates = get_bool(t, "checks.rates", false);
  cfg.checks.path = get_bool(t, "checks.path", false);
  cfg.checks.energy = get_bool(t, "checks.energy", false);
  cfg.checks.certify = get_bool(t, "checks.certify", false);
  cfg.checks.gap = get_bool(t, "checks.gap", false);
  if (cfg.checks.gap && !cfg.is_constrained())
    throw ConfigError("GapCheck", "the gap check needs a constrained problem");
  cfg.checks.path_points = static_cast<int>(get_num(t, "checks.path_points", 50));
  if (auto it = t.find("checks.rate_window"); it != t.end()) {
    const auto& arr = it->second.as_array();
    if (arr.size() != 2) throw ConfigError("RateWindow", "rate_window needs [lo, hi]");
    cfg.checks.rate_window = std::make_pair(arr[0].as_number(), arr[1].as_number());
  }

  if (auto it = t.find("output.dir"); it != t.end())
    cfg.out_dir = it->second.as_string();
  cfg.seed = static_cast<std::uint64_t>(get_num(t, "output.seed", 0.0));

  if (const char* env = std::getenv("TIKHOFLOW_OUT"); env && *env) cfg.out_dir = env;

  // fail fast on bad flow parameters
  dynamics::validate_params(cfg.params);
  if (!(cfg.schedule.t_end > cfg.params.t0))
    throw ConfigError("Schedule", "t_end must exceed t0");
  if ((cfg.checks.path || cfg.checks.energy || cfg.checks.certify) &&
      cfg.params.baseline)
    throw ConfigError("BaselineScale",
                      "path/energy/certify checks need c > 0, not baseline mode");
  return cfg;
}

std::string echo_toml(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[problem]\n";
  if (!c.problem_builtin.empty()) os << "builtin = \"" << c.problem_builtin << "\"\n";
  if (!c.problem_file.empty()) os << "file = \"" << c.problem_file << "\"\n";
  if (c.inline_M) {
    os << "M = " << toml_mat(*c.inline_M) << "\n";
    os << "a = " << toml_vec(*c.inline_a) << "\n";
  }
  if (c.qp_Q) {
    os << "Q = " << toml_mat(*c.qp_Q) << "\n";
    os << "q = " << toml_vec(*c.qp_q) << "\n";
    os << "B = " << toml_mat(*c.qp_B) << "\n";
    os << "b = " << toml_vec(*c.qp_b) << "\n";
  }
  os << "\n[flow]\n";
  os << "alpha = " << csv::format17(c.params.alpha) << "\n";
  os << "q = " << csv::format17(c.params.q) << "\n";
  os << "s = " << csv::format17(c.params.s) << "\n";
  os << "beta = " << csv::format17(c.params.beta) << "\n";
  os << "gamma = " << csv::format17(c.params.gamma) << "\n";
  os << "c = " << csv::format17(c.params.c) << "\n";
  os << "t0 = " << csv::format17(c.params.t0) << "\n";
  os << "baseline = " << (c.params.baseline ? "true" : "false") << "\n";
  os << "\n[init]\n";
  if (c.u0)
    os << "u0 = " << toml_vec(*c.u0) << "\n";
  else
    os << "u0 = \"random\"\nscale = " << csv::format17(c.u0_scale) << "\n";
  if (c.v0) os << "v0 = " << toml_vec(*c.v0) << "\n";
  os << "\n[schedule]\n";
  os << "t_end = " << csv::format17(c.schedule.t_end) << "\n";
  os << "points_per_decade = " << c.schedule.points_per_decade << "\n";
  os << "\n[integrator]\n";
  os << "rel_tol = " << csv::format17(c.tols.rel) << "\n";
  os << "abs_tol = " << csv::format17(c.tols.abs) << "\n";
  os << "\n[checks]\n";
  os << "rates = " << (c.checks.rates ? "true" : "false") << "\n";
  os << "path = " << (c.checks.path ? "true" : "false") << "\n";
  os << "energy = " << (c.checks.energy ? "true" : "false") << "\n";
  os << "certify = " << (c.checks.certify ? "true" : "false") << "\n";
  os << "path_points = " << c.checks.path_points << "\n";
  if (c.checks.rate_window)
    os << "rate_window = [" << csv::format17(c.checks.rate_window->first) << ", "
       << csv::format17(c.checks.rate_window->second) << "]\n";
  os << "\n[output]\n";
  os << "dir = \"" << c.out_dir << "\"\n";
  os << "seed = " << c.seed << "\n";
  return os.str();
}

ops::MonotoneOperator resolve_operator(const ExperimentConfig& config) {
  if (!config.problem_builtin.empty())
    return problems::builtin(config.problem_builtin).op;
  if (!config.problem_file.empty())
    return problems::load_problem_file(config.problem_file).op;
  return ops::make_affine(*config.inline_M, *config.inline_a);
}

// --------------------------------------------------------------- experiments

namespace {

std::string pass_str(bool b) { return b ? "pass" : "FAIL"; }

double two_term(double t, double e1, double e2) {
  return std::pow(t, e1) + std::pow(t, e2);
}

} // namespace

std::string format_certificate(const diagnostics::Certificate& cert) {
  std::ostringstream os;
  const auto& p = cert.params;
  os << "certificate for alpha=" << csv::format17(p.alpha) << " q=" << csv::format17(p.q)
     << " s=" << csv::format17(p.s) << " beta=" << csv::format17(p.beta)
     << " gamma=" << csv::format17(p.gamma) << " c=" << csv::format17(p.c) << "\n";
  const auto& k = cert.consts;
  os << "constants: b=" << csv::format17(k.b) << " tau=" << csv::format17(k.tau)
     << " s1=" << csv::format17(k.s1) << " s2=" << csv::format17(k.s2)
     << " s3=" << csv::format17(k.s3) << " s4=" << csv::format17(k.s4)
     << " s5=" << csv::format17(k.s5) << " s6=" << csv::format17(k.s6)
     << " K=" << csv::format17(k.K) << "\n";
  for (const auto& cond : cert.conditions) {
    os << "  " << cond.name << ": ";
    if (cond.last_failure_t > 0.0)
      os << "last failure at t=" << csv::format17(cond.last_failure_t);
    else
      os << "holds on the whole grid";
    os << ", value at grid end " << csv::format17(cond.value_at_end) << "\n";
  }
  if (cert.certified)
    os << "certified: T* = " << csv::format17(cert.t_star) << "\n";
  else
    os << "NOT certified: " << cert.failure << "\n";
  return os.str();
}

RunReport run_experiment(const ExperimentConfig& config) {
  RunReport report;
  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);
  report.out_dir = config.out_dir;

  const ops::MonotoneOperator op = resolve_operator(config);
  const dynamics::FlowParams params =
      dynamics::validate_params(config.params, &report.warning);

  Vec u0;
  if (config.u0) {
    u0 = *config.u0;
  } else {
    Rng rng(config.seed);
    u0 = config.u0_scale * rng.normal_vec(op.dim());
  }
  Vec v0 = config.v0 ? *config.v0 : Vec::Zero(op.dim());
  if (u0.size() != op.dim() || v0.size() != op.dim())
    throw ConfigError("InitSpec", "u0/v0 do not match the problem dimension");

  const std::vector<double> schedule =
      dynamics::log_schedule(params.t0, config.schedule.t_end,
                             config.schedule.points_per_decade);
  const dynamics::Trajectory traj =
      dynamics::integrate(op, params, u0, v0, schedule, config.tols);

  // minimal-norm solution when available
  std::optional<Vec> x_star;
  if (op.affine()) x_star = tikhonov::minimal_norm_solution(op).x_star;

  const bool xt_feasible = op.affine() && params.c > 0.0 && op.dim() <= 200;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // trajectory table
  csv::Table traj_table;
  traj_table.columns = {"t", "norm_x", "norm_xdot", "norm_Ax", "dist_to_xstar",
                        "dist_to_xt"};
  std::vector<tikhonov::TikhonovPoint> path_points;
  for (const auto& smp : traj.samples) {
    double d_star = nan, d_xt = nan;
    if (x_star) d_star = (smp.x - *x_star).norm();
    if (xt_feasible) {
      tikhonov::TikhonovPoint pt = tikhonov::tikhonov_point(
          op, params.epsilon(smp.t), smp.x, tikhonov::default_point_tol(params.epsilon(smp.t)));
      pt.t = smp.t;
      d_xt = (smp.x - pt.x).norm();
      path_points.push_back(std::move(pt));
    }
    traj_table.rows.push_back(
        {smp.t, smp.norm_x, smp.norm_xdot, smp.norm_Ax, d_star, d_xt});
  }
  csv::write_csv(out_dir / "trajectory.csv", traj_table);
  report.artifacts.push_back("trajectory.csv");

  const double q = params.q, s = params.s;
  const double e_xdot = std::max(s - 1.0, -(2.0 * q + s) / 2.0);
  const double e_Ax = std::max(s - 1.0 - q, -(4.0 * q + s) / 2.0);

  if (config.checks.rates) {
    const double hi = config.checks.rate_window ? config.checks.rate_window->second
                                                : config.schedule.t_end;
    const double lo = config.checks.rate_window ? config.checks.rate_window->first
                                                : config.schedule.t_end / 100.0;
    diagnostics::Series xdot_series, ax_series;
    for (const auto& smp : traj.samples) {
      xdot_series.push_back({smp.t, smp.norm_xdot});
      ax_series.push_back({smp.t, smp.norm_Ax});
    }
    const auto fit1 = diagnostics::fit_rate(xdot_series, lo, hi, e_xdot, "norm_xdot");
    const auto fit2 = diagnostics::fit_rate(ax_series, lo, hi, e_Ax, "norm_Ax");
    report.fits = {fit1, fit2};

    auto env1 = [&](double t) { return two_term(t, s - 1.0, -(2.0 * q + s) / 2.0); };
    auto env2 = [&](double t) {
      return two_term(t, s - 1.0 - q, -(4.0 * q + s) / 2.0);
    };
    const double mid = hi / 10.0 > lo ? hi / 10.0 : std::sqrt(lo * hi);
    const double sup1_in = diagnostics::sup_ratio(xdot_series, lo, mid, env1);
    const double sup1 = diagnostics::sup_ratio(xdot_series, lo, hi, env1);
    const double sup2_in = diagnostics::sup_ratio(ax_series, lo, mid, env2);
    const double sup2 = diagnostics::sup_ratio(ax_series, lo, hi, env2);
    const double growth1 = sup1 / sup1_in - 1.0;
    const double growth2 = sup2 / sup2_in - 1.0;
    const bool ok = std::isfinite(sup1) && std::isfinite(sup2) && growth1 < 0.10 &&
                    growth2 < 0.10;
    std::ostringstream det;
    det << "velocity sup-ratio " << csv::format17(sup1) << " (growth "
        << csv::format17(growth1) << "), operator sup-ratio " << csv::format17(sup2)
        << " (growth " << csv::format17(growth2) << ")";
    report.checks.push_back({"rates", ok, det.str()});

    std::ostringstream rc;
    rc << "quantity,window_lo,window_hi,slope,r2,claimed_exponent,sup_ratio\n";
    for (const auto& f : report.fits)
      rc << f.quantity << "," << csv::format17(f.window_lo) << ","
         << csv::format17(f.window_hi) << "," << csv::format17(f.slope) << ","
         << csv::format17(f.r2) << "," << csv::format17(f.claimed_exponent) << ","
         << csv::format17(f.sup_ratio) << "\n";
    csv::write_text(out_dir / "rates.csv", rc.str());
    report.artifacts.push_back("rates.csv");
  }

  if (config.checks.path) {
    const auto grid = log_grid(params.t0, config.schedule.t_end, config.checks.path_points);
    const auto path_report = tikhonov::path_checks(op, params, grid);
    csv::Table pt;
    pt.columns = {"t", "eps", "norm_xt", "residual", "iterations"};
    for (const auto& row : path_report.rows)
      pt.rows.push_back({row.t, row.eps, row.norm_xt, row.residual,
                         static_cast<double>(row.iterations)});
    csv::write_csv(out_dir / "path.csv", pt);
    report.artifacts.push_back("path.csv");
    std::ostringstream det;
    det << path_report.norm_bound_failures << " norm-bound, "
        << path_report.derivative_failures << " derivative, "
        << path_report.monotonicity_failures << " monotonicity failures over "
        << path_report.rows.size() << " points"
        << (path_report.derivative_warning ? " (isolated derivative warnings)" : "");
    report.checks.push_back({"path", path_report.pass, det.str()});
  }

  if (config.checks.energy) {
    if (!xt_feasible)
      throw ConfigError("EnergyCheck",
                        "energy check needs a linear representation and c > 0");
    diagnostics::ProofConstants consts;
    try {
      consts = diagnostics::select_proof_constants(params);
    } catch (const InfeasibleConstants&) {
      consts.b = params.alpha; // energy uses only the anchoring weight
      consts.s1 = consts.s3 = consts.s4 = consts.s6 = 0.01;
      consts.s2 = 1.0 / params.alpha;
      consts.s5 = (params.alpha - 1.0) / params.alpha;
      consts.K = 0.0;
      consts.tau = 0.0;
    }
    csv::Table et;
    et.columns = {"t", "v", "u", "E", "bound_ratio"};
    double u_min = 0.0;
    diagnostics::Series ratio_series;
    for (size_t i = 0; i < traj.samples.size(); ++i) {
      const auto& smp = traj.samples[i];
      const auto eb = diagnostics::energy(smp, path_points[i], op, params, consts);
      const double envelope =
          std::pow(smp.t, 2.0 * q + 2.0 * s - 2.0) + std::pow(smp.t, -s);
      const double ratio = eb.E / envelope;
      et.rows.push_back({eb.t, eb.v, eb.u, eb.E, ratio});
      u_min = std::min(u_min, eb.u);
      ratio_series.push_back({smp.t, ratio});
    }
    csv::write_csv(out_dir / "energy.csv", et);
    report.artifacts.push_back("energy.csv");
    const double t_hi = config.schedule.t_end;
    const double sup_last =
        diagnostics::sup_ratio(ratio_series, t_hi / 10.0, t_hi, [](double) { return 1.0; });
    const double sup_prev = diagnostics::sup_ratio(ratio_series, t_hi / 100.0,
                                                   t_hi / 10.0, [](double) { return 1.0; });
    const double growth = sup_last / sup_prev - 1.0;
    const bool ok = u_min >= -1e-10 && growth < 0.10;
    std::ostringstream det;
    det << "min u = " << csv::format17(u_min) << ", bound-ratio growth over final decade = "
        << csv::format17(growth);
    report.checks.push_back({"energy", ok, det.str()});
  }

  if (config.checks.certify) {
    std::string detail;
    bool ok = false;
    try {
      const auto consts = diagnostics::select_proof_constants(params);
      const auto grid =
          log_spaced(params.t0, std::max(1e6, config.schedule.t_end), 40);
      const auto cert = diagnostics::certify(params, consts, grid);
      csv::write_text(out_dir / "certificate.txt", format_certificate(cert));
      report.artifacts.push_back("certificate.txt");
      ok = cert.certified;
      detail = ok ? "T* = " + csv::format17(cert.t_star) : cert.failure;
    } catch (const InfeasibleConstants& e) {
      detail = e.what();
      csv::write_text(out_dir / "certificate.txt", detail + "\n");
      report.artifacts.push_back("certificate.txt");
    }
    report.checks.push_back({"certify", ok, detail});
  }

  // rate plot
  {
    svg::PlotSpec plot;
    plot.x_column = "t";
    plot.y_columns = {"norm_xdot", "norm_Ax"};
    plot.loglog = true;
    plot.reference_slopes = {e_xdot, e_Ax};
    plot.title = "decay of |xdot| and |A(x)|";
    svg::render_svg(out_dir / "rates.svg", traj_table, plot);
    report.artifacts.push_back("rates.svg");
  }

  csv::write_text(out_dir / "config_echo.toml", echo_toml(config));
  csv::write_text(out_dir / "report.txt", format_report(config, report));
  return report;
}

std::string format_report(const ExperimentConfig& config, const RunReport& report) {
  std::ostringstream os;
  os << "tikhoflow run report\n";
  os << "====================\n\n";
  if (!report.warning.empty()) os << "warning: " << report.warning << "\n\n";
  os << "checks:\n";
  if (report.checks.empty()) os << "  (none enabled)\n";
  for (const auto& c : report.checks)
    os << "  [" << pass_str(c.pass) << "] " << c.name << ": " << c.detail << "\n";
  if (!report.fits.empty()) {
    os << "\nfitted rates:\n";
    for (const auto& f : report.fits)
      os << "  " << f.quantity << ": slope " << csv::format17(f.slope) << " (r2 "
         << csv::format17(f.r2) << "), sup value/t^" << csv::format17(f.claimed_exponent)
         << " = " << csv::format17(f.sup_ratio) << "\n";
  }
  os << "\nartifacts in " << report.out_dir << ":\n";
  for (const auto& a : report.artifacts) os << "  " << a << "\n";
  os << "\nconfig echo (also in config_echo.toml):\n\n" << echo_toml(config);
  return os.str();
}

} // namespace tikhoflow::cli
