#pragma once

// Discrete-derivative influences: pointwise and average per-coordinate
// influence, one-sided deletion / insertion forms, exact group influence by
// enumeration or sampling, the degree-split group influence formula, and the
// nonlinear-residual bound.

#include <cstdint>
#include <vector>

#include "pbfa/spectrum.hpp"

namespace pbfa {

// f(x | i -> +1) - f(x | i -> -1); independent of the value of x_i.
double pointwise_influence(const FunctionOracle& f, const Point& x, int i);

// E over x of the pointwise influence, read off the spectrum: (2/sigma) c_i.
double average_influence(const Spectrum& s, int i);

// Same expectation by exact table enumeration.
double average_influence_exact(const FunctionOracle& f, const CubeConfig& cube,
                               int i);

// One-sided forms: E[f(x) - f(x|i->-1)] = p * Inf_i and
// E[f(x|i->+1) - f(x)] = (1-p) * Inf_i.
double deletion_influence(const Spectrum& s, int i);
double insertion_influence(const Spectrum& s, int i);

// E[f(x) - f(x | set -> -1)] by exact weighted enumeration; needs a table.
double group_influence_exact(const FunctionOracle& f, const Subset& set,
                             const CubeConfig& cube);

struct McEstimate {
  double estimate = 0.0;
  double halfwidth = 0.0;  // Hoeffding-style, range 2 * bound
  std::int64_t samples = 0;
};

// Sampled version of the same expectation for dimensions past the exact cap.
McEstimate group_influence_mc(const FunctionOracle& f, const Subset& set,
                              const CubeConfig& cube, std::int64_t samples,
                              std::uint64_t seed, double eta = 0.05);

struct GroupInfluenceReport {
  double exact = 0.0;            // linear_part - fourier_residual
  double linear_part = 0.0;      // p * sum of average influences over the set
  double fourier_residual = 0.0; // contribution of levels >= 2 inside the set
  double bound = 0.0;            // (1-p)^(-|set|/2) sqrt(mass at levels >= 2)
};

// Degree-split identity: group influence = linear part minus
// sum over sub-subsets S of size >= 2 of (-1)^|S| (p/(1-p))^(|S|/2) c_S.
// Enumerates 2^|set| sub-subsets, so |set| is capped at kExactDimensionCap.
GroupInfluenceReport group_influence_fourier(const Spectrum& s,
                                             const Subset& set);

double group_residual_bound(const Spectrum& s, const Subset& set);

}  // namespace pbfa
