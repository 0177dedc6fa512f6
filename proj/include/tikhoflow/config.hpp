#ifndef TIKHOFLOW_CONFIG_HPP
#define TIKHOFLOW_CONFIG_HPP

#include "tikhoflow/diagnostics.hpp"
#include "tikhoflow/dynamics.hpp"
#include "tikhoflow/operators.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tikhoflow::cli {

/// Minimal TOML subset: [section] headers, key = value, strings, numbers,
/// booleans, (nested) arrays, # comments. Keys are flattened to "section.key".
class TomlValue;
using TomlArray = std::vector<TomlValue>;

class TomlValue {
public:
  TomlValue() : v_(0.0) {}
  explicit TomlValue(std::string s) : v_(std::move(s)) {}
  explicit TomlValue(double d) : v_(d) {}
  explicit TomlValue(bool b) : v_(b) {}
  explicit TomlValue(TomlArray a) : v_(std::move(a)) {}

  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_number() const { return std::holds_alternative<double>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_array() const { return std::holds_alternative<TomlArray>(v_); }

  const std::string& as_string() const;
  double as_number() const;
  bool as_bool() const;
  const TomlArray& as_array() const;

private:
  std::variant<std::string, double, bool, TomlArray> v_;
};

using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);

struct ScheduleSpec {
  double t_end = 1e4;
  int points_per_decade = 200;
};

struct ChecksSpec {
  bool rates = false;
  bool path = false;
  bool energy = false;
  bool certify = false;
  bool gap = false; // constrained problems only
  std::optional<std::pair<double, double>> rate_window; // default [t_end/100, t_end]
  int path_points = 50;
};

struct ExperimentConfig {
  // exactly one of builtin / file / inline affine / inline constrained problem
  std::string problem_builtin;
  std::string problem_file;
  std::optional<Mat> inline_M;
  std::optional<Vec> inline_a;
  // constrained program min x'Qx/2 + q'x s.t. B x = b (joint flow)
  std::optional<Mat> qp_Q;
  std::optional<Vec> qp_q;
  std::optional<Mat> qp_B;
  std::optional<Vec> qp_b;
  bool is_constrained() const { return qp_Q.has_value(); }

  dynamics::FlowParams params;
  std::optional<Vec> u0; // absent => seeded random
  double u0_scale = 1.0;
  std::optional<Vec> v0; // absent => zeros
  ScheduleSpec schedule;
  dynamics::Tolerances tols;
  ChecksSpec checks;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
};

/// Parses and validates a config file. TIKHOFLOW_OUT (when set) overrides the
/// output directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Serialization that reproduces the run exactly (17-digit floats).
std::string echo_toml(const ExperimentConfig& config);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunReport {
  std::vector<CheckResult> checks;
  std::vector<diagnostics::RateFit> fits;
  std::vector<std::string> artifacts; // data files written into out_dir
  std::string warning;                // from parameter validation
  std::string out_dir;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Integrates, runs the enabled checks, writes CSV/SVG artifacts and the
/// report (report.txt + config_echo.toml) into the output directory.
RunReport run_experiment(const ExperimentConfig& config);

std::string format_report(const ExperimentConfig& config, const RunReport& report);

/// Resolves the operator a config refers to.
ops::MonotoneOperator resolve_operator(const ExperimentConfig& config);

std::string format_certificate(const diagnostics::Certificate& cert);

} // namespace tikhoflow::cli

#endif
