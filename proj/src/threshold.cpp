#include "pbfa/threshold.hpp"

#include <cmath>
#include <limits>

#include "pbfa/influence.hpp"

namespace pbfa {

ThresholdModel ThresholdModel::create(int n, Subset group, double beta,
                                      double alpha, double p) {
  (void)CubeConfig::create(n, p);
  if (group.empty()) {
    throw std::invalid_argument("ThresholdModel: group must be nonempty");
  }
  if (group.indices().back() >= n) {
    throw std::invalid_argument("ThresholdModel: group index past dimension");
  }
  if (!(beta >= 0.0) || !(beta < 1.0)) {
    throw std::invalid_argument("ThresholdModel: beta must lie in [0, 1)");
  }
  if (std::isnan(alpha) || alpha < 0.0) {
    throw std::invalid_argument("ThresholdModel: alpha must be >= 0");
  }
  ThresholdModel m;
  m.n = n;
  m.group = std::move(group);
  m.beta = beta;
  m.alpha = alpha;
  m.p = p;
  return m;
}

bool ThresholdModel::hard() const { return std::isinf(alpha); }

double binomial_upper_tail(int m, double q, int kmin) {
  if (m < 0) throw std::invalid_argument("binomial_upper_tail: m < 0");
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::invalid_argument("binomial_upper_tail: q must be in (0, 1)");
  }
  if (kmin <= 0) return 1.0;
  if (kmin > m) return 0.0;
  const double log_q = std::log(q);
  const double log_1q = std::log1p(-q);
  const double log_choose_base = std::lgamma(static_cast<double>(m) + 1.0);
  auto log_term = [&](int j) {
    return log_choose_base - std::lgamma(static_cast<double>(j) + 1.0) -
           std::lgamma(static_cast<double>(m - j) + 1.0) + j * log_q +
           (m - j) * log_1q;
  };
  // Sum whichever tail has fewer dominant terms; Kahan keeps the small terms.
  const bool sum_upper = static_cast<double>(kmin) > q * (m + 1);
  double sum = 0.0, carry = 0.0;
  auto add = [&](double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  };
  if (sum_upper) {
    for (int j = m; j >= kmin; --j) add(std::exp(log_term(j)));
    return sum;
  }
  for (int j = 0; j < kmin; ++j) add(std::exp(log_term(j)));
  return 1.0 - sum;
}

namespace {

// Smallest success count that clears the strict threshold "> beta * M".
int strict_threshold_count(double beta, int group_size) {
  return static_cast<int>(std::floor(beta * group_size)) + 1;
}

void require_hard(const ThresholdModel& model, const char* op) {
  if (!model.hard()) {
    throw std::invalid_argument(std::string(op) +
                                ": needs the hard indicator (alpha = inf)");
  }
}

}  // namespace

double threshold_mean(const ThresholdModel& model) {
  require_hard(model, "threshold_mean");
  const int m = model.group_size();
  return binomial_upper_tail(m, model.p, strict_threshold_count(model.beta, m));
}

double threshold_group_influence(const ThresholdModel& model, int k) {
  require_hard(model, "threshold_group_influence");
  const int m = model.group_size();
  if (k < 0 || k > m) {
    throw std::invalid_argument(
        "threshold_group_influence: k must lie in [0, |A|]");
  }
  const int kmin = strict_threshold_count(model.beta, m);
  // Forcing k members to -1 leaves Bin(M - k, p) potential successes against
  // the original threshold.
  return binomial_upper_tail(m, model.p, kmin) -
         binomial_upper_tail(m - k, model.p, kmin);
}

double threshold_single_influence(const ThresholdModel& model) {
  return threshold_group_influence(model, 1) / model.p;
}

double blowup_ratio(const ThresholdModel& model, int k) {
  require_hard(model, "blowup_ratio");
  if (k < 1 || k > model.group_size()) {
    throw std::invalid_argument("blowup_ratio: k must lie in [1, |A|]");
  }
  const double group = threshold_group_influence(model, k);
  const double single = threshold_group_influence(model, 1);
  if (single == 0.0) {
    return group == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                        : std::numeric_limits<double>::infinity();
  }
  return group / (static_cast<double>(k) * single);
}

double blowup_lower_bound(double p, int k) {
  if (!(p > 0.5) || !(p < 1.0)) {
    throw std::invalid_argument("blowup_lower_bound: needs p in (1/2, 1)");
  }
  if (k < 1) throw std::invalid_argument("blowup_lower_bound: k >= 1");
  return std::pow(2.0 * (1.0 - p), -(k - 1)) / static_cast<double>(k);
}

std::pair<double, double> margin_group_influence(const ThresholdModel& model,
                                                 const Subset& subgroup) {
  if (std::isinf(model.alpha)) {
    throw std::invalid_argument(
        "margin_group_influence: needs a finite slope");
  }
  for (int i : subgroup.indices()) {
    if (!model.group.contains(i)) {
      throw std::invalid_argument(
          "margin_group_influence: subgroup must lie inside the group");
    }
  }
  const double m = static_cast<double>(model.group_size());
  // Expectation route: removing i from the average costs alpha * p / M each.
  const double exact =
      model.alpha * static_cast<double>(subgroup.size()) * model.p / m;
  // Influence route: the margin's pointwise influence per member is constant,
  // evaluated here through the discrete derivative at an arbitrary point.
  const Subset group = model.group;
  const double alpha = model.alpha;
  const double beta = model.beta;
  FunctionOracle margin(
      model.n, std::max(1.0, alpha * std::max(beta, 1.0 - beta)),
      [group, alpha, beta, m](const Point& x) {
        double avg = 0.0;
        for (int i : group.indices()) avg += x.shadow(i);
        return alpha * (avg / m - beta);
      });
  const Point base = Point::from_mask(0, model.n);
  double linear = 0.0;
  for (int i : subgroup.indices()) {
    linear += model.p * pointwise_influence(margin, base, i);
  }
  return {exact, linear};
}

FunctionOracle sigmoid_oracle(const ThresholdModel& model) {
  const Subset group = model.group;
  const double m = static_cast<double>(model.group_size());
  const double beta = model.beta;
  if (model.hard()) {
    return FunctionOracle(model.n, 1.0, [group, m, beta](const Point& x) {
      double avg = 0.0;
      for (int i : group.indices()) avg += x.shadow(i);
      return (avg / m > beta) ? 1.0 : 0.0;
    });
  }
  const double alpha = model.alpha;
  return FunctionOracle(model.n, 1.0, [group, m, beta, alpha](const Point& x) {
    double avg = 0.0;
    for (int i : group.indices()) avg += x.shadow(i);
    return 1.0 / (1.0 + std::exp(-alpha * (avg / m - beta)));
  });
}

}  // namespace pbfa
