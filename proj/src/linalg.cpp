#include "tikhoflow/linalg.hpp"

#include "tikhoflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tikhoflow {

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("GridRange", "need 0 < lo < hi");
  if (n < 2) throw ConfigError("GridRange", "need at least 2 points");
  std::vector<double> t(static_cast<size_t>(n));
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (int k = 0; k < n; ++k)
    t[static_cast<size_t>(k)] = std::pow(10.0, llo + (lhi - llo) * k / (n - 1));
  t.front() = lo;
  t.back() = hi;
  return t;
}

std::vector<double> log_spaced(double lo, double hi, int points_per_decade) {
  if (points_per_decade < 1)
    throw ConfigError("GridRange", "points_per_decade must be >= 1");
  const double decades = std::log10(hi / lo);
  const int n = std::max(2, static_cast<int>(std::lround(points_per_decade * decades)) + 1);
  return log_grid(lo, hi, n);
}

} // namespace tikhoflow
