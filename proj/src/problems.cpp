#include "tikhoflow/problems.hpp"

#include "tikhoflow/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace tikhoflow::problems {

namespace {

using nlohmann::json;

Mat mat_from_json(const json& j, const std::string& key, long dim) {
  if (!j.contains(key)) throw ParseError("problem file missing '" + key + "'");
  const auto& rows = j.at(key);
  if (!rows.is_array() || rows.empty())
    throw ParseError("'" + key + "' must be a non-empty array of rows");
  Mat M(rows.size(), rows.at(0).size());
  for (long i = 0; i < M.rows(); ++i) {
    const auto& row = rows.at(static_cast<size_t>(i));
    if (!row.is_array() || static_cast<long>(row.size()) != M.cols())
      throw ParseError("ragged matrix '" + key + "'");
    for (long k = 0; k < M.cols(); ++k)
      M(i, k) = row.at(static_cast<size_t>(k)).get<double>();
  }
  if (dim > 0 && (M.rows() != dim || M.cols() != dim))
    throw DimensionMismatch("'" + key + "' must be " + std::to_string(dim) + " x " +
                            std::to_string(dim));
  if (!all_finite(M)) throw ParseError("'" + key + "' has non-finite entries");
  return M;
}

Vec vec_from_json(const json& j, const std::string& key, long dim) {
  if (!j.contains(key)) throw ParseError("problem file missing '" + key + "'");
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ParseError("'" + key + "' must be an array");
  Vec v(arr.size());
  for (long i = 0; i < v.size(); ++i) v[i] = arr.at(static_cast<size_t>(i)).get<double>();
  if (dim > 0 && v.size() != dim)
    throw DimensionMismatch("'" + key + "' must have " + std::to_string(dim) + " entries");
  if (!all_finite(v)) throw ParseError("'" + key + "' has non-finite entries");
  return v;
}

Problem make(const std::string& name, const std::string& desc,
             ops::MonotoneOperator op) {
  return Problem{name, desc, std::move(op)};
}

std::vector<Problem> build_all() {
  std::vector<Problem> all;

  all.push_back(make("identity", "A(x) = x on R^2, unique zero at the origin",
                     ops::make_affine(Mat::Identity(2, 2), Vec::Zero(2))));

  {
    Mat R(2, 2);
    R << 0, -1, 1, 0;
    all.push_back(make("rotation", "skew quarter-turn, A(x) = (-x2, x1)",
                       ops::make_affine(R, Vec::Zero(2))));
    Vec a(2);
    a << 1.0, -2.0;
    all.push_back(make("skew_shifted", "quarter-turn around the shifted zero (1, -2)",
                       ops::make_affine(R, a)));
  }

  {
    Mat M = Mat::Zero(4, 4);
    M(0, 0) = M(1, 1) = 1.0;
    Vec a = Vec::Ones(4);
    ops::SolutionSet sol;
    sol.anchor = a;
    sol.kernel_basis = Mat::Zero(4, 2);
    sol.kernel_basis(2, 0) = 1.0;
    sol.kernel_basis(3, 1) = 1.0;
    all.push_back(make("rankdef4",
                       "diag(1,1,0,0) shifted by ones; solution plane {(1,1,*,*)}",
                       ops::make_affine(M, a).with_declared_solutions(sol)));
  }

  {
    Mat M(2, 2);
    M << 2, 0, 0, 3;
    Vec a(2);
    a << 1.0, 1.0;
    all.push_back(make("fullrank_shifted", "diag(2,3) shifted by ones, unique zero",
                       ops::make_affine(M, a)));
  }

  {
    Mat Q(2, 2);
    Q << 2, 0, 0, 3;
    all.push_back(make("quadratic_gradient", "gradient of x'diag(2,3)x/2",
                       ops::make_gradient_quadratic(Q, Vec::Zero(2))));
  }

  {
    auto value = [](const Vec& x) {
      double s = 0.0;
      for (long i = 0; i < x.size(); ++i) s += std::log(std::cosh(x[i]));
      return s;
    };
    auto grad = [](const Vec& x) -> Vec {
      Vec g(x.size());
      for (long i = 0; i < x.size(); ++i) g[i] = std::tanh(x[i]);
      return g;
    };
    all.push_back(make("logcosh", "gradient of sum log cosh(x_i), saturating monotone",
                       ops::make_gradient(value, grad, 2)));
  }

  {
    auto cubic = [](const Vec& x) -> Vec {
      Vec out(x.size());
      for (long i = 0; i < x.size(); ++i) out[i] = x[i] * x[i] * x[i] + x[i];
      return out;
    };
    all.push_back(
        make("cubic", "componentwise x^3 + x, strictly monotone, no structure tag",
             ops::MonotoneOperator::opaque(2, cubic)));
  }

  return all;
}

} // namespace

const std::vector<Problem>& builtins() {
  static const std::vector<Problem> all = build_all();
  return all;
}

const Problem& builtin(const std::string& name) {
  for (const auto& p : builtins())
    if (p.name == name) return p;
  throw ConfigError("UnknownProblem", "no built-in problem named '" + name + "'");
}

Problem load_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("FileNotFound", path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  if (!j.contains("dim") || !j.at("dim").is_number_integer())
    throw ParseError("problem file needs integer 'dim'");
  const long dim = j.at("dim").get<long>();
  if (dim < 1) throw ParseError("'dim' must be >= 1");
  const std::string kind = j.value("kind", "");

  ops::MonotoneOperator op = [&]() {
    if (kind == "affine")
      return ops::make_affine(mat_from_json(j, "M", dim), vec_from_json(j, "a", dim));
    if (kind == "gradient_quadratic")
      return ops::make_gradient_quadratic(mat_from_json(j, "Q", dim),
                                          vec_from_json(j, "q", dim));
    throw ParseError("unknown problem kind '" + kind + "'");
  }();

  if (j.contains("solution")) {
    const auto& s = j.at("solution");
    ops::SolutionSet sol;
    sol.anchor = vec_from_json(s, "anchor", dim);
    if (s.contains("kernel_basis")) {
      const auto& rows = s.at("kernel_basis");
      if (!rows.is_array()) throw ParseError("'kernel_basis' must be an array of rows");
      if (rows.empty()) {
        sol.kernel_basis = Mat::Zero(dim, 0);
      } else {
        // rows are basis vectors; store them as columns
        Mat K(dim, rows.size());
        for (size_t c = 0; c < rows.size(); ++c) {
          Vec col(dim);
          const auto& row = rows.at(c);
          if (!row.is_array() || static_cast<long>(row.size()) != dim)
            throw ParseError("ragged 'kernel_basis'");
          for (long i = 0; i < dim; ++i) col[i] = row.at(static_cast<size_t>(i)).get<double>();
          K.col(static_cast<long>(c)) = col;
        }
        sol.kernel_basis = K;
      }
    } else {
      sol.kernel_basis = Mat::Zero(dim, 0);
    }
    op = op.with_declared_solutions(sol);
  }

  return Problem{path.stem().string(), "loaded from " + path.string(), std::move(op)};
}

} // namespace tikhoflow::problems
