#ifndef TIKHOFLOW_ERRORS_HPP
#define TIKHOFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace tikhoflow {

/// Base of all library errors. The name() tag is stable and machine-checkable;
/// what() is "<name>: <detail>".
class Error : public std::runtime_error {
public:
  Error(std::string_view name, const std::string& detail)
      : std::runtime_error(std::string(name) + ": " + detail), name_(name) {}
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

/// Bad inputs: malformed configs, invalid parameters, inconsistent shapes.
/// The CLI maps these to exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Failures while computing: divergence, non-finite values, stalled solvers.
/// The CLI maps these to exit code 3.
class RunFailure : public Error {
public:
  using Error::Error;
};

#define TIKHOFLOW_CONFIG_ERROR(NAME)                                           \
  struct NAME final : ConfigError {                                            \
    explicit NAME(const std::string& detail) : ConfigError(#NAME, detail) {}   \
  }

#define TIKHOFLOW_RUN_FAILURE(NAME)                                            \
  struct NAME final : RunFailure {                                             \
    explicit NAME(const std::string& detail) : RunFailure(#NAME, detail) {}    \
  }

TIKHOFLOW_CONFIG_ERROR(DimensionMismatch);
TIKHOFLOW_CONFIG_ERROR(NotMonotone);
TIKHOFLOW_CONFIG_ERROR(AlphaTooSmall);
TIKHOFLOW_CONFIG_ERROR(ExponentRange);
TIKHOFLOW_CONFIG_ERROR(TikhonovBound);
TIKHOFLOW_CONFIG_ERROR(NonPositive);
TIKHOFLOW_CONFIG_ERROR(InsufficientSamples);
TIKHOFLOW_CONFIG_ERROR(EmptyWindow);
TIKHOFLOW_CONFIG_ERROR(MissingColumn);
TIKHOFLOW_CONFIG_ERROR(EmptyData);
TIKHOFLOW_CONFIG_ERROR(ParseError);

TIKHOFLOW_RUN_FAILURE(NonFiniteOutput);
TIKHOFLOW_RUN_FAILURE(NonFiniteState);
TIKHOFLOW_RUN_FAILURE(NoProgress);
TIKHOFLOW_RUN_FAILURE(MaxIterations);
TIKHOFLOW_RUN_FAILURE(ContinuationStalled);
TIKHOFLOW_RUN_FAILURE(InfeasibleConstants);
TIKHOFLOW_RUN_FAILURE(Infeasible);

#undef TIKHOFLOW_CONFIG_ERROR
#undef TIKHOFLOW_RUN_FAILURE

/// Step-size collapse during integration; carries the last accepted time so
/// callers can report how far the trajectory got.
struct StepSizeUnderflow final : RunFailure {
  StepSizeUnderflow(const std::string& detail, double t_last_good)
      : RunFailure("StepSizeUnderflow", detail), t_last(t_last_good) {}
  double t_last;
};

} // namespace tikhoflow

#endif
