#pragma once

// Sampled noise stability, the nonnegative polynomial fit that splits off the
// degree <= 1 stability mass, the spectral-decay upper bound, and the direct
// pairwise degree-1 estimator.
//
// Reproducibility contract: every pair of correlated samples consumes its own
// counter-RNG stream keyed by (seed, sequence, pair index), pair products are
// summed into fixed-size blocks, and block partials are reduced in global
// block order. Estimates therefore depend only on (seed, sequence), never on
// how blocks are assigned to partitions.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pbfa/datamodel.hpp"

namespace pbfa {

// Pairs per reduction block; partition boundaries are block-aligned.
inline constexpr std::int64_t kPairBlock = 4096;

struct McOptions {
  std::uint64_t seed = 0;
  std::uint64_t sequence = 0;  // distinct per logical estimate within a run
  int partitions = 1;          // work-splitting only; never changes values
  double eta = 0.05;           // half-width confidence parameter
  bool fused_rho1 = false;     // evaluate once per pair when rho == 1
};

struct StabilityRecord {
  double rho = 0.0;
  double estimate = 0.0;
  std::int64_t pairs = 0;
  double halfwidth = 0.0;
  double eta = 0.05;
};

// Hoeffding-style half-width for a mean of products of bound-C evaluations,
// with evals = 2 * pairs: sqrt(C^2 * ln(2/eta) * 2 / evals).
double stability_halfwidth(double bound, std::int64_t evals, double eta);

// Mean of f(x) f(x') over evals/2 independent rho-correlated pairs.
// evals must be even and >= 2. Deterministic per the contract above.
StabilityRecord noise_stability_mc(const FunctionOracle& f, std::int64_t evals,
                                   double rho, const CubeConfig& cube,
                                   const McOptions& opt);

// Partial sum of pair products over the block-aligned range [pair_begin,
// pair_end), accumulated block by block. Adding single-block partials in
// block order reproduces any wider range's sum bit for bit.
double stability_pair_sum(const FunctionOracle& f, double rho,
                          const CubeConfig& cube, std::uint64_t seed,
                          std::uint64_t sequence, std::int64_t pair_begin,
                          std::int64_t pair_end, bool fused);

// Nonnegative least squares min ||A z - y|| s.t. z >= 0, active-set with
// lowest-index tie-breaking. KKT residuals are driven below kkt_tol.
Eigen::VectorXd solve_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                           double kkt_tol = 1e-8);

struct PolyFitConfig {
  std::vector<double> rhos{0.0, 0.1, 0.2, 1.0};
  int degree = 2;

  bool fit_includes_rho1() const;
  void validate() const;  // rhos distinct in [0,1], degree >= 1
};

struct ResidualEstimate {
  double total = 0.0;  // estimate of E[f^2]
  double b0 = 0.0;     // fitted constant stability mass
  double b1 = 0.0;     // fitted degree-1 stability mass
  double tail2 = 0.0;  // total - b0 - b1
  // First-order propagation of the per-record half-widths through the
  // unconstrained least-squares map (the NNLS solution path at an interior
  // optimum).
  double tail2_halfwidth = 0.0;
  std::vector<StabilityRecord> records;  // one per fit rho, then rho = 1 total
  PolyFitConfig fit;
  std::uint64_t seed = 0;
  int partitions = 1;
  std::int64_t budget = 0;
  std::int64_t evals_used = 0;
  std::int64_t discarded_budget = 0;
};

// Splits budget into k+1 equal even shares (k fit correlations plus a fresh
// rho = 1 pass for the total), fits a nonnegative degree-d polynomial to the
// stability curve, and reports total - constant - linear mass. The flooring
// remainder is discarded and reported.
ResidualEstimate residual_estimation(const FunctionOracle& f,
                                     std::int64_t budget,
                                     const PolyFitConfig& fit,
                                     const CubeConfig& cube,
                                     const McOptions& opt);

// (1 - hbar) / (1 - rho^2) for hbar = h(rho)/h(1); an upper bound on the
// fraction of stability mass at levels >= 2. Requires rho in [0, 1).
double stability_upper_bound(double hbar, double rho);

struct Degree1Estimate {
  double total = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double tail2 = 0.0;
  std::int64_t samples = 0;
};

// Plug-in estimator from n independent labeled samples: total = mean f^2,
// b0 and b1 = pairwise means over ordered distinct pairs, using the
// single-coordinate kernel of the degree-1 projector. Decomposed to O(n
// * dim) arithmetic; identical to the literal pairwise double sum.
Degree1Estimate direct_degree1_estimator(const std::vector<Sample>& samples,
                                         const CubeConfig& cube);

}  // namespace pbfa
