#ifndef TIKHOFLOW_PROBLEMS_HPP
#define TIKHOFLOW_PROBLEMS_HPP

#include "tikhoflow/operators.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tikhoflow::problems {

struct Problem {
  std::string name;
  std::string description;
  ops::MonotoneOperator op;
};

/// Built-in desk-scale test problems (rotation, shifted full/deficient-rank
/// affine maps, quadratic gradients).
const std::vector<Problem>& builtins();
const Problem& builtin(const std::string& name);

/// JSON problem files:
///   { "dim": n, "kind": "affine" | "gradient_quadratic",
///     "M": [[...]], "a": [...],          (affine: A(x) = M (x - a))
///     "Q": [[...]], "q": [...],          (gradient_quadratic: A = Qx + q)
///     "solution": { "anchor": [...], "kernel_basis": [[...]] } }   (optional)
/// Matrices are row-major arrays of rows.
Problem load_problem_file(const std::filesystem::path& path);

} // namespace tikhoflow::problems

#endif
