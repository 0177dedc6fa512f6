#ifndef TIKHOFLOW_OPERATORS_HPP
#define TIKHOFLOW_OPERATORS_HPP

#include "tikhoflow/errors.hpp"
#include "tikhoflow/linalg.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace tikhoflow::ops {

enum class StructureKind { affine, gradient, saddle, opaque };

/// Linear representation A(x) = M x + offset. For operators built from a shift
/// point a (A(x) = M (x - a)) the anchor is kept alongside.
struct AffineForm {
  Mat M;
  Vec offset;
  std::optional<Vec> anchor;
};

struct GradientForm {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
};

/// Declared solution set {anchor + span(kernel_basis columns)} of an affine
/// problem; carried for cross-checks, never used by the solvers themselves.
struct SolutionSet {
  Vec anchor;
  Mat kernel_basis; // n x k, k may be 0
};

/// Single-valued monotone map on R^n. Immutable after construction; eval is
/// pure, so operators can be shared across concurrent runs.
class MonotoneOperator {
public:
  int dim() const { return dim_; }
  StructureKind kind() const { return kind_; }

  /// Evaluates A(x). Throws DimensionMismatch / NonFiniteOutput.
  Vec eval(const Vec& x) const;
  Vec operator()(const Vec& x) const { return eval(x); }

  /// Linear representation if one is known (affine, quadratic gradient, or
  /// quadratic saddle structure), else nullptr.
  const AffineForm* affine() const { return affine_ ? &*affine_ : nullptr; }
  const GradientForm* gradient() const { return gradient_ ? &*gradient_ : nullptr; }
  const SolutionSet* declared_solutions() const {
    return solutions_ ? &*solutions_ : nullptr;
  }

  static MonotoneOperator affine_from_anchor(const Mat& M, const Vec& a);
  static MonotoneOperator affine_from_offset(StructureKind kind, const Mat& M,
                                             const Vec& offset);
  static MonotoneOperator from_gradient(GradientForm g, int dim);
  static MonotoneOperator opaque(int dim, std::function<Vec(const Vec&)> f);

  MonotoneOperator with_declared_solutions(SolutionSet s) const;
  MonotoneOperator with_gradient(GradientForm g) const;
  /// Same map with all structure hidden (exercises the structure-free paths).
  MonotoneOperator as_opaque() const;

private:
  MonotoneOperator() = default;
  int dim_ = 0;
  StructureKind kind_ = StructureKind::opaque;
  std::function<Vec(const Vec&)> eval_;
  std::optional<AffineForm> affine_;
  std::optional<GradientForm> gradient_;
  std::optional<SolutionSet> solutions_;
};

/// A(x) = M (x - a). Requires the symmetric part of M to be positive
/// semidefinite within 1e-10 on its smallest eigenvalue.
MonotoneOperator make_affine(const Mat& M, const Vec& a);

/// A = grad f for a smooth convex f given by value/gradient callables.
MonotoneOperator make_gradient(std::function<double(const Vec&)> value,
                               std::function<Vec(const Vec&)> grad, int dim);

/// A = grad f for f(x) = x'Qx/2 + q'x; exposes the linear representation.
MonotoneOperator make_gradient_quadratic(const Mat& Q, const Vec& q_lin);

struct ProbeReport {
  double min_inner_product = 0.0;
  bool pass = false;
  Vec witness_x, witness_y;
};

/// Samples `pairs` point pairs from a seeded standard normal and reports the
/// minimum of <A(x)-A(y), x-y>; pass iff that minimum >= -tol.
ProbeReport monotonicity_probe(const MonotoneOperator& op, std::uint64_t seed,
                               int pairs, double tol);

/// Central-difference Jacobian estimate (diagnostics/tests only; the flow
/// itself never evaluates Jacobians).
Mat fd_jacobian(const MonotoneOperator& op, const Vec& x, double h);

} // namespace tikhoflow::ops

#endif
