#ifndef TIKHOFLOW_LINALG_HPP
#define TIKHOFLOW_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

namespace tikhoflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

/// Logarithmically spaced grid from lo to hi, points_per_decade samples per
/// factor of 10, endpoints included. lo == first element, hi == last.
std::vector<double> log_spaced(double lo, double hi, int points_per_decade);

/// Exactly n log-spaced points on [lo, hi], endpoints included (n >= 2).
std::vector<double> log_grid(double lo, double hi, int n);

/// Deterministic RNG with a fixed bit-to-double mapping so that seeded results
/// do not depend on the standard library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (two uniforms per call, no cache).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  Vec normal_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

private:
  std::uint64_t state_;
};

} // namespace tikhoflow

#endif
