#include "tikhoflow/operators.hpp"

#include <Eigen/Eigenvalues>

#include <limits>
#include <sstream>

namespace tikhoflow::ops {

namespace {

std::string dims(long a, long b) {
  std::ostringstream os;
  os << a << " vs " << b;
  return os.str();
}

void check_psd_symmetric_part(const Mat& M) {
  if (!all_finite(M)) throw NonFiniteOutput("matrix has non-finite entries");
  const Mat sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -1e-10) {
    std::ostringstream os;
    os << "symmetric part has min eigenvalue " << min_eig;
    throw NotMonotone(os.str());
  }
}

} // namespace

Vec MonotoneOperator::eval(const Vec& x) const {
  if (x.size() != dim_)
    throw DimensionMismatch("operator eval: " + dims(x.size(), dim_));
  Vec out = eval_(x);
  if (out.size() != dim_)
    throw DimensionMismatch("operator output: " + dims(out.size(), dim_));
  if (!all_finite(out)) throw NonFiniteOutput("operator produced NaN/Inf");
  return out;
}

MonotoneOperator MonotoneOperator::affine_from_anchor(const Mat& M, const Vec& a) {
  MonotoneOperator op = affine_from_offset(StructureKind::affine, M, -(M * a));
  op.affine_->anchor = a;
  return op;
}

MonotoneOperator MonotoneOperator::affine_from_offset(StructureKind kind,
                                                      const Mat& M,
                                                      const Vec& offset) {
  if (M.rows() != M.cols())
    throw DimensionMismatch("affine matrix must be square: " + dims(M.rows(), M.cols()));
  if (offset.size() != M.rows())
    throw DimensionMismatch("affine offset: " + dims(offset.size(), M.rows()));
  MonotoneOperator op;
  op.dim_ = static_cast<int>(M.rows());
  op.kind_ = kind;
  op.affine_ = AffineForm{M, offset, std::nullopt};
  op.eval_ = [M, offset](const Vec& x) -> Vec { return M * x + offset; };
  return op;
}

MonotoneOperator MonotoneOperator::from_gradient(GradientForm g, int dim) {
  MonotoneOperator op;
  op.dim_ = dim;
  op.kind_ = StructureKind::gradient;
  op.gradient_ = g;
  op.eval_ = [grad = g.grad](const Vec& x) -> Vec { return grad(x); };
  return op;
}

MonotoneOperator MonotoneOperator::opaque(int dim, std::function<Vec(const Vec&)> f) {
  MonotoneOperator op;
  op.dim_ = dim;
  op.kind_ = StructureKind::opaque;
  op.eval_ = std::move(f);
  return op;
}

MonotoneOperator MonotoneOperator::with_declared_solutions(SolutionSet s) const {
  if (s.anchor.size() != dim_)
    throw DimensionMismatch("solution anchor: " + dims(s.anchor.size(), dim_));
  if (s.kernel_basis.size() > 0 && s.kernel_basis.rows() != dim_)
    throw DimensionMismatch("kernel basis rows: " + dims(s.kernel_basis.rows(), dim_));
  MonotoneOperator op = *this;
  op.solutions_ = std::move(s);
  return op;
}

MonotoneOperator MonotoneOperator::with_gradient(GradientForm g) const {
  MonotoneOperator op = *this;
  op.gradient_ = std::move(g);
  return op;
}

MonotoneOperator MonotoneOperator::as_opaque() const {
  MonotoneOperator op;
  op.dim_ = dim_;
  op.kind_ = StructureKind::opaque;
  op.eval_ = eval_;
  return op;
}

MonotoneOperator make_affine(const Mat& M, const Vec& a) {
  if (a.size() != M.rows())
    throw DimensionMismatch("anchor size: " + dims(a.size(), M.rows()));
  check_psd_symmetric_part(M);
  return MonotoneOperator::affine_from_anchor(M, a);
}

MonotoneOperator make_gradient(std::function<double(const Vec&)> value,
                               std::function<Vec(const Vec&)> grad, int dim) {
  return MonotoneOperator::from_gradient(GradientForm{std::move(value), std::move(grad)},
                                         dim);
}

MonotoneOperator make_gradient_quadratic(const Mat& Q, const Vec& q_lin) {
  if (q_lin.size() != Q.rows())
    throw DimensionMismatch("linear term: " + dims(q_lin.size(), Q.rows()));
  check_psd_symmetric_part(Q);
  MonotoneOperator op =
      MonotoneOperator::affine_from_offset(StructureKind::gradient, Q, q_lin);
  GradientForm g;
  g.value = [Q, q_lin](const Vec& x) { return 0.5 * x.dot(Q * x) + q_lin.dot(x); };
  g.grad = [Q, q_lin](const Vec& x) -> Vec { return Q * x + q_lin; };
  return op.with_gradient(std::move(g));
}

ProbeReport monotonicity_probe(const MonotoneOperator& op, std::uint64_t seed,
                               int pairs, double tol) {
  if (pairs < 1) throw ConfigError("ProbeConfig", "pairs must be >= 1");
  Rng rng(seed);
  ProbeReport report;
  report.min_inner_product = std::numeric_limits<double>::infinity();
  for (int i = 0; i < pairs; ++i) {
    const Vec x = rng.normal_vec(op.dim());
    const Vec y = rng.normal_vec(op.dim());
    const Vec d = x - y;
    const double ip = (op.eval(x) - op.eval(y)).dot(d);
    if (ip < report.min_inner_product) {
      report.min_inner_product = ip;
      report.witness_x = x;
      report.witness_y = y;
    }
  }
  report.pass = report.min_inner_product >= -tol;
  return report;
}

Mat fd_jacobian(const MonotoneOperator& op, const Vec& x, double h) {
  if (h <= 0.0) throw ConfigError("FdStep", "step must be positive");
  const int n = op.dim();
  Mat J(n, n);
  Vec xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (op.eval(xp) - op.eval(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  if (!all_finite(J)) throw NonFiniteOutput("fd_jacobian produced NaN/Inf");
  return J;
}

} // namespace tikhoflow::ops
