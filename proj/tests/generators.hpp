#pragma once

// Seeded generators for the randomized property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace detlab_test {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  /// Log-uniform on [lo, hi].
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::vector<double> positive_values(int n, double lo, double hi) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(log_uniform(lo, hi));
    return v;
  }

  /// Nonzero signed values with |x| in [lo, hi].
  std::vector<double> signed_values(int n, double lo, double hi) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back((integer(0, 1) ? 1.0 : -1.0) * log_uniform(lo, hi));
    return v;
  }

  /// Decaying phases c r^k.
  std::vector<double> decaying_phases(int n, double c_max, double r_lo, double r_hi) {
    const double c = uniform(-c_max, c_max);
    const double r = uniform(r_lo, r_hi);
    std::vector<double> v;
    double x = c;
    for (int i = 0; i < n; ++i, x *= r) v.push_back(x);
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detlab_test
