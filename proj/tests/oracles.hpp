#pragma once

// Brute-force reference computations for the test suite. Everything here
// enumerates the cube from first principles, recomputing probabilities and
// basis factors inline, so the library's transform-based fast paths are
// always checked against an independent route.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline double mask_probability(std::uint64_t mask, int n, double p) {
  double w = 1.0;
  for (int i = 0; i < n; ++i) w *= ((mask >> i) & 1u) ? p : (1.0 - p);
  return w;
}

inline double basis_factor(int sign, double p) {
  const double mu = 2.0 * p - 1.0;
  const double sigma = std::sqrt(4.0 * p * (1.0 - p));
  return (static_cast<double>(sign) - mu) / sigma;
}

inline double basis_at(std::uint64_t subset_mask, std::uint64_t point_mask,
                       double p) {
  double v = 1.0;
  while (subset_mask != 0) {
    const int i = std::countr_zero(subset_mask);
    v *= basis_factor(((point_mask >> i) & 1u) ? 1 : -1, p);
    subset_mask &= subset_mask - 1;
  }
  return v;
}

// <phi_S, phi_T> by full enumeration.
inline double basis_inner_product(std::uint64_t s, std::uint64_t t, int n,
                                  double p) {
  double acc = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    acc += mask_probability(m, n, p) * basis_at(s, m, p) * basis_at(t, m, p);
  }
  return acc;
}

// <f, phi_S> by full enumeration.
inline double fourier_coefficient(const std::vector<double>& table,
                                  std::uint64_t s, int n, double p) {
  double acc = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    acc += mask_probability(m, n, p) * table[m] * basis_at(s, m, p);
  }
  return acc;
}

inline double mean(const std::vector<double>& table, int n, double p) {
  double acc = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    acc += mask_probability(m, n, p) * table[m];
  }
  return acc;
}

inline double second_moment(const std::vector<double>& table, int n,
                            double p) {
  double acc = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    acc += mask_probability(m, n, p) * table[m] * table[m];
  }
  return acc;
}

// E[f(x) f(x')] under the rho-correlated joint law, all 4^n ordered pairs.
inline double noise_stability_joint(const std::vector<double>& table, int n,
                                    double p, double rho) {
  const double flip_plus = (1.0 - rho) * (1.0 - p);
  const double flip_minus = (1.0 - rho) * p;
  const std::uint64_t size = std::uint64_t{1} << n;
  double acc = 0.0;
  for (std::uint64_t m = 0; m < size; ++m) {
    const double pm = mask_probability(m, n, p) * table[m];
    if (pm == 0.0) continue;
    for (std::uint64_t m2 = 0; m2 < size; ++m2) {
      double trans = 1.0;
      for (int i = 0; i < n; ++i) {
        const bool a = (m >> i) & 1u;
        const bool b = (m2 >> i) & 1u;
        trans *= a ? (b ? 1.0 - flip_plus : flip_plus)
                   : (b ? flip_minus : 1.0 - flip_minus);
      }
      acc += pm * trans * table[m2];
    }
  }
  return acc;
}

// E[(f - intercept - sum_i weights_i shadow_i)^2] by full enumeration.
inline double quadratic_risk(const std::vector<double>& table, int n, double p,
                             double intercept,
                             const std::vector<double>& weights) {
  double acc = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    double pred = intercept;
    for (int i = 0; i < n; ++i) {
      if ((m >> i) & 1u) pred += weights[static_cast<std::size_t>(i)];
    }
    const double r = table[m] - pred;
    acc += mask_probability(m, n, p) * r * r;
  }
  return acc;
}

// E[f(x) - f(x with set_mask forced to -1)] by full enumeration.
inline double group_influence(const std::vector<double>& table, int n,
                              double p, std::uint64_t set_mask) {
  double acc = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    acc += mask_probability(m, n, p) * (table[m] - table[m & ~set_mask]);
  }
  return acc;
}

// E[f(x | i -> +1) - f(x | i -> -1)] by full enumeration.
inline double average_influence(const std::vector<double>& table, int n,
                                double p, int i) {
  const std::uint64_t bit = std::uint64_t{1} << i;
  double acc = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    acc += mask_probability(m, n, p) * (table[m | bit] - table[m & ~bit]);
  }
  return acc;
}

// Pr[#successes > beta * m] by enumerating all 2^m outcome masks.
inline double binomial_strict_tail_enum(int m, double q, double beta) {
  double acc = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    const int c = std::popcount(mask);
    if (static_cast<double>(c) > beta * m) {
      acc += std::pow(q, c) * std::pow(1.0 - q, m - c);
    }
  }
  return acc;
}

// Central finite difference of the mean in the bias parameter.
inline double mean_derivative_fd(const std::vector<double>& table, int n,
                                 double p, double h = 1e-4) {
  return (mean(table, n, p + h) - mean(table, n, p - h)) / (2.0 * h);
}

}  // namespace oracle
