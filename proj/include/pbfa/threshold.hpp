#pragma once

// Soft and hard threshold-of-average functions on a coordinate group:
// closed-form binomial means, exact removal influence at any group size,
// the deletion blow-up ratio with its geometric lower bound, and the
// exactly-linear margin identities.

#include <utility>

#include "pbfa/cube.hpp"

namespace pbfa {

// f(x) = S(alpha (avg_A(x) - beta)) with S the logistic function and
// avg_A the fraction of +1 coordinates inside group A. alpha = infinity
// selects the hard indicator 1{avg_A(x) > beta}, strictly.
struct ThresholdModel {
  int n = 0;        // ambient dimension
  Subset group;     // acting set A
  double beta = 0.5;
  double alpha = 0.0;  // may be +infinity
  double p = 0.5;

  static ThresholdModel create(int n, Subset group, double beta, double alpha,
                               double p);
  int group_size() const { return group.size(); }
  bool hard() const;
};

// Pr[Bin(m, q) >= kmin] via log-gamma terms, summing the smaller tail.
double binomial_upper_tail(int m, double q, int kmin);

// E[f] for the hard indicator: Pr[Bin(M, p) > beta M].
double threshold_mean(const ThresholdModel& model);

// E[f(x)] - E[f(x | k coordinates of A -> -1)] for the hard indicator.
// Which k coordinates is irrelevant by symmetry.
double threshold_group_influence(const ThresholdModel& model, int k);

// Two-sided single influence: the k = 1 removal influence divided by p.
double threshold_single_influence(const ThresholdModel& model);

// Removal influence of k coordinates over k times the single-coordinate
// removal influence. Exactly 1 at k = 1; +infinity when the denominator
// vanishes. Requires the hard indicator.
double blowup_ratio(const ThresholdModel& model, int k);

// Geometric growth floor (2(1-p))^(-k+1) / k for the blow-up ratio of the
// balanced hard threshold with p > 1/2.
double blowup_lower_bound(double p, int k);

// Group influence of the linear margin alpha (avg_A(x) - beta) for a subset
// of A, returned as {expectation form, p * summed single influences}. The
// two are equal identically; both are computed from their own definitions.
std::pair<double, double> margin_group_influence(const ThresholdModel& model,
                                                 const Subset& subgroup);

// Evaluation oracle for the model (logistic, or the hard indicator when
// alpha is infinite). Values lie in [0, 1], so the declared bound is 1.
FunctionOracle sigmoid_oracle(const ThresholdModel& model);

}  // namespace pbfa
