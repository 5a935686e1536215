#include "pbfa/influence.hpp"

#include <bit>
#include <cmath>

namespace pbfa {

double pointwise_influence(const FunctionOracle& f, const Point& x, int i) {
  if (i < 0 || i >= f.dimension() || x.dimension() != f.dimension()) {
    throw std::invalid_argument("pointwise_influence: bad coordinate");
  }
  Point hi = x;
  hi.set_bit(i, 1);
  Point lo = x;
  lo.set_bit(i, -1);
  return f(hi) - f(lo);
}

double average_influence(const Spectrum& s, int i) {
  if (i < 0 || i >= s.dimension()) {
    throw std::invalid_argument("average_influence: bad coordinate");
  }
  return (2.0 / s.cube().sigma) * s.get(Subset{i});
}

double average_influence_exact(const FunctionOracle& f, const CubeConfig& cube,
                               int i) {
  if (i < 0 || i >= cube.n || f.dimension() != cube.n) {
    throw std::invalid_argument("average_influence_exact: bad coordinate");
  }
  if (cube.n > kExactDimensionCap) {
    throw capacity_error("average_influence_exact: dimension exceeds cap");
  }
  const std::vector<double>& table =
      f.has_table() ? f.table() : f.tabulated().table();
  const std::vector<double> probs = popcount_probabilities(cube);
  const std::uint64_t bit = std::uint64_t{1} << i;
  double acc = 0.0;
  for (std::uint64_t m = 0; m < table.size(); ++m) {
    acc += probs[static_cast<std::size_t>(std::popcount(m))] *
           (table[m | bit] - table[m & ~bit]);
  }
  return acc;
}

double deletion_influence(const Spectrum& s, int i) {
  return s.p() * average_influence(s, i);
}

double insertion_influence(const Spectrum& s, int i) {
  return (1.0 - s.p()) * average_influence(s, i);
}

double group_influence_exact(const FunctionOracle& f, const Subset& set,
                             const CubeConfig& cube) {
  if (f.dimension() != cube.n) {
    throw std::invalid_argument("group_influence_exact: dimension mismatch");
  }
  if (cube.n > kExactDimensionCap) {
    throw capacity_error(
        "group_influence_exact: dimension exceeds exact cap; use the sampled "
        "form");
  }
  if (!set.empty() && set.indices().back() >= cube.n) {
    throw std::invalid_argument("group_influence_exact: index past dimension");
  }
  const std::vector<double>& table =
      f.has_table() ? f.table() : f.tabulated().table();
  const std::vector<double> probs = popcount_probabilities(cube);
  const std::uint64_t clear = ~set.to_mask();
  double acc = 0.0;
  for (std::uint64_t m = 0; m < table.size(); ++m) {
    acc += probs[static_cast<std::size_t>(std::popcount(m))] *
           (table[m] - table[m & clear]);
  }
  return acc;
}

McEstimate group_influence_mc(const FunctionOracle& f, const Subset& set,
                              const CubeConfig& cube, std::int64_t samples,
                              std::uint64_t seed, double eta) {
  if (samples < 1) {
    throw std::invalid_argument("group_influence_mc: need samples >= 1");
  }
  if (!(eta > 0.0) || !(eta < 1.0)) {
    throw std::invalid_argument("group_influence_mc: eta must be in (0, 1)");
  }
  if (!set.empty() && set.indices().back() >= cube.n) {
    throw std::invalid_argument("group_influence_mc: index past dimension");
  }
  CounterRng rng(seed, 0x67726f7570ULL);  // dedicated stream label
  double acc = 0.0;
  for (std::int64_t k = 0; k < samples; ++k) {
    const Point x = sample_p_biased(cube, rng);
    acc += f(x) - f(restrict_point(x, set, -1));
  }
  McEstimate e;
  e.estimate = acc / static_cast<double>(samples);
  e.samples = samples;
  e.halfwidth = 2.0 * f.bound() *
                std::sqrt(std::log(2.0 / eta) / static_cast<double>(samples));
  return e;
}

GroupInfluenceReport group_influence_fourier(const Spectrum& s,
                                             const Subset& set) {
  if (!set.empty() && set.indices().back() >= s.dimension()) {
    throw std::invalid_argument(
        "group_influence_fourier: index past dimension");
  }
  if (set.size() > kExactDimensionCap) {
    throw capacity_error(
        "group_influence_fourier: set too large to enumerate sub-subsets");
  }
  const double p = s.p();
  GroupInfluenceReport report;
  for (int i : set.indices()) {
    report.linear_part += p * average_influence(s, i);
  }
  // sqrt(p/(1-p)) per element; signs alternate with sub-subset parity.
  const double root_odds = std::sqrt(p / (1.0 - p));
  const std::vector<int> members = set.indices();
  const std::uint64_t combos = std::uint64_t{1} << members.size();
  double residual = 0.0;
  for (std::uint64_t m = 0; m < combos; ++m) {
    const int size = std::popcount(m);
    if (size < 2) continue;
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(size));
    for (std::size_t j = 0; j < members.size(); ++j) {
      if ((m >> j) & 1u) chosen.push_back(members[j]);
    }
    const double coeff = s.get(Subset::from_indices(chosen));
    if (coeff == 0.0) continue;
    const double sign = (size % 2 == 0) ? 1.0 : -1.0;
    residual += sign * std::pow(root_odds, size) * coeff;
  }
  report.fourier_residual = residual;
  report.exact = report.linear_part - report.fourier_residual;
  report.bound = group_residual_bound(s, set);
  return report;
}

double group_residual_bound(const Spectrum& s, const Subset& set) {
  const double tail = level_weights(s).tail(2);
  return std::pow(1.0 - s.p(), -0.5 * static_cast<double>(set.size())) *
         std::sqrt(std::max(tail, 0.0));
}

}  // namespace pbfa
