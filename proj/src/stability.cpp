#include "pbfa/stability.hpp"

#include <algorithm>
#include <cmath>

namespace pbfa {

namespace {

// Stream id layout: | sequence : 12 | call : 8 | pair : 44 |.
inline constexpr int kPairBits = 44;
inline constexpr int kCallBits = 8;

std::uint64_t pair_stream(std::uint64_t sequence, std::uint64_t call,
                          std::int64_t pair) {
  return (((sequence << kCallBits) | call) << kPairBits) |
         static_cast<std::uint64_t>(pair);
}

}  // namespace

double stability_halfwidth(double bound, std::int64_t evals, double eta) {
  if (!(eta > 0.0) || !(eta < 1.0)) {
    throw std::invalid_argument("stability_halfwidth: eta must be in (0, 1)");
  }
  if (evals < 2) {
    throw std::invalid_argument("stability_halfwidth: evals must be >= 2");
  }
  return std::sqrt(bound * bound * std::log(2.0 / eta) * 2.0 /
                   static_cast<double>(evals));
}

double stability_pair_sum(const FunctionOracle& f, double rho,
                          const CubeConfig& cube, std::uint64_t seed,
                          std::uint64_t sequence, std::int64_t pair_begin,
                          std::int64_t pair_end, bool fused) {
  if (pair_begin % kPairBlock != 0) {
    throw std::invalid_argument(
        "stability_pair_sum: range must start on a block boundary");
  }
  if (pair_begin > pair_end || pair_end >= (std::int64_t{1} << kPairBits)) {
    throw std::invalid_argument("stability_pair_sum: bad pair range");
  }
  const bool fuse = fused && rho == 1.0;
  double acc = 0.0;
  for (std::int64_t block = pair_begin; block < pair_end;
       block += kPairBlock) {
    const std::int64_t stop = std::min(block + kPairBlock, pair_end);
    double block_sum = 0.0;
    for (std::int64_t pair = block; pair < stop; ++pair) {
      CounterRng rng(seed, pair_stream(sequence, 0, pair));
      const Point x = sample_p_biased(cube, rng);
      if (fuse) {
        const double v = f(x);
        block_sum += v * v;
      } else {
        const Point y = sample_rho_correlated(x, rho, cube, rng);
        block_sum += f(x) * f(y);
      }
    }
    acc += block_sum;
  }
  return acc;
}

StabilityRecord noise_stability_mc(const FunctionOracle& f, std::int64_t evals,
                                   double rho, const CubeConfig& cube,
                                   const McOptions& opt) {
  if (evals < 2 || evals % 2 != 0) {
    throw std::invalid_argument(
        "noise_stability_mc: evals must be even and >= 2");
  }
  if (!(rho >= 0.0) || !(rho <= 1.0)) {
    throw std::invalid_argument("noise_stability_mc: rho must lie in [0, 1]");
  }
  if (opt.partitions < 1) {
    throw std::invalid_argument("noise_stability_mc: partitions must be >= 1");
  }
  if (f.dimension() != cube.n) {
    throw std::invalid_argument("noise_stability_mc: dimension mismatch");
  }
  const std::int64_t pairs = evals / 2;
  const std::int64_t blocks = (pairs + kPairBlock - 1) / kPairBlock;
  // Each partition owns a contiguous run of blocks and reports one partial
  // per block; partials are reduced in global block order afterwards, so the
  // result cannot depend on how many partitions did the work.
  std::vector<double> block_sums(static_cast<std::size_t>(blocks), 0.0);
  const std::int64_t parts = std::min<std::int64_t>(opt.partitions, blocks);
  for (std::int64_t part = 0; part < parts; ++part) {
    const std::int64_t block_lo = (blocks * part) / parts;
    const std::int64_t block_hi = (blocks * (part + 1)) / parts;
    for (std::int64_t b = block_lo; b < block_hi; ++b) {
      const std::int64_t lo = b * kPairBlock;
      const std::int64_t hi = std::min(lo + kPairBlock, pairs);
      block_sums[static_cast<std::size_t>(b)] = stability_pair_sum(
          f, rho, cube, opt.seed, opt.sequence, lo, hi, opt.fused_rho1);
    }
  }
  double acc = 0.0;
  for (double s : block_sums) acc += s;
  StabilityRecord rec;
  rec.rho = rho;
  rec.pairs = pairs;
  rec.estimate = acc / static_cast<double>(pairs);
  rec.eta = opt.eta;
  rec.halfwidth = stability_halfwidth(f.bound(), evals, opt.eta);
  return rec;
}

Eigen::VectorXd solve_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                           double kkt_tol) {
  const Eigen::Index cols = a.cols();
  if (a.rows() != y.size() || cols == 0) {
    throw std::invalid_argument("solve_nnls: shape mismatch");
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(cols);
  std::vector<bool> passive(static_cast<std::size_t>(cols), false);

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    }
    const Eigen::VectorXd sol = sub.colPivHouseholderQr().solve(y);
    z.setZero(cols);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      z(idx[k]) = sol(static_cast<Eigen::Index>(k));
    }
  };

  const int max_outer = 10 * static_cast<int>(cols) + 50;
  for (int outer = 0; outer < max_outer; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (y - a * x);
    // Most violated inactive coordinate; strict comparison keeps the lowest
    // index on ties.
    Eigen::Index enter = -1;
    double best = kkt_tol;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best) {
        best = w(j);
        enter = j;
      }
    }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;

    Eigen::VectorXd z(cols);
    for (;;) {
      solve_passive(z);
      bool feasible = true;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!passive[static_cast<std::size_t>(j)]) continue;
        if (z(j) <= 0.0) {
          feasible = false;
          const double denom = x(j) - z(j);
          if (denom > 0.0) alpha = std::min(alpha, x(j) / denom);
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-14) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
  }
  return x;
}

bool PolyFitConfig::fit_includes_rho1() const {
  return std::find(rhos.begin(), rhos.end(), 1.0) != rhos.end();
}

void PolyFitConfig::validate() const {
  if (degree < 1) {
    throw std::invalid_argument("PolyFitConfig: degree must be >= 1");
  }
  if (rhos.empty()) {
    throw std::invalid_argument("PolyFitConfig: need at least one rho");
  }
  for (double r : rhos) {
    if (!(r >= 0.0) || !(r <= 1.0)) {
      throw std::invalid_argument("PolyFitConfig: rhos must lie in [0, 1]");
    }
  }
  std::vector<double> sorted = rhos;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("PolyFitConfig: rhos must be distinct");
  }
}

ResidualEstimate residual_estimation(const FunctionOracle& f,
                                     std::int64_t budget,
                                     const PolyFitConfig& fit,
                                     const CubeConfig& cube,
                                     const McOptions& opt) {
  fit.validate();
  const int k = static_cast<int>(fit.rhos.size());
  if (k < fit.degree + 1) {
    throw std::invalid_argument(
        "residual_estimation: need at least degree + 1 correlation levels");
  }
  std::int64_t share = budget / (k + 1);
  share -= share % 2;
  if (share < 2) {
    throw std::invalid_argument(
        "residual_estimation: budget below 2 evaluations per call");
  }

  ResidualEstimate est;
  est.fit = fit;
  est.seed = opt.seed;
  est.partitions = opt.partitions;
  est.budget = budget;
  est.discarded_budget = budget - static_cast<std::int64_t>(k + 1) * share;

  McOptions call = opt;
  for (int i = 0; i < k; ++i) {
    const double rho = fit.rhos[static_cast<std::size_t>(i)];
    call.sequence = (opt.sequence << 8) | static_cast<std::uint64_t>(i);
    est.records.push_back(noise_stability_mc(f, share, rho, cube, call));
    est.evals_used += (opt.fused_rho1 && rho == 1.0) ? share / 2 : share;
  }
  call.sequence = (opt.sequence << 8) | static_cast<std::uint64_t>(k);
  est.records.push_back(noise_stability_mc(f, share, 1.0, cube, call));
  est.evals_used +=
      (opt.fused_rho1 ? share / 2 : share);
  est.total = est.records.back().estimate;

  Eigen::MatrixXd a(k, fit.degree + 1);
  Eigen::VectorXd y(k);
  for (int i = 0; i < k; ++i) {
    double power = 1.0;
    for (int d = 0; d <= fit.degree; ++d) {
      a(i, d) = power;
      power *= fit.rhos[static_cast<std::size_t>(i)];
    }
    y(i) = est.records[static_cast<std::size_t>(i)].estimate;
  }
  const Eigen::VectorXd z = solve_nnls(a, y);
  est.b0 = z(0);
  est.b1 = z(1);
  est.tail2 = est.total - est.b0 - est.b1;

  // Half-width propagation through the unconstrained least-squares map
  // z = (A^T A)^-1 A^T y; the relevant functional is z_0 + z_1.
  const Eigen::MatrixXd pinv =
      (a.transpose() * a).ldlt().solve(a.transpose());
  double propagated = est.records.back().halfwidth;
  for (int i = 0; i < k; ++i) {
    propagated += std::abs(pinv(0, i) + pinv(1, i)) *
                  est.records[static_cast<std::size_t>(i)].halfwidth;
  }
  est.tail2_halfwidth = propagated;
  return est;
}

double stability_upper_bound(double hbar, double rho) {
  if (!(rho >= 0.0) || !(rho < 1.0)) {
    throw std::domain_error(
        "stability_upper_bound: rho must lie in [0, 1)");
  }
  return (1.0 - hbar) / (1.0 - rho * rho);
}

Degree1Estimate direct_degree1_estimator(const std::vector<Sample>& samples,
                                         const CubeConfig& cube) {
  const std::int64_t n = static_cast<std::int64_t>(samples.size());
  if (n < 2) {
    throw std::invalid_argument(
        "direct_degree1_estimator: need at least two samples");
  }
  for (const Sample& s : samples) {
    if (s.x.dimension() != cube.n) {
      throw std::invalid_argument(
          "direct_degree1_estimator: dimension mismatch");
    }
  }
  const double nn = static_cast<double>(n);
  const double pair_count = nn * (nn - 1.0);
  double sum = 0.0, sum_sq = 0.0;
  for (const Sample& s : samples) {
    sum += s.value;
    sum_sq += s.value * s.value;
  }
  const double total = sum_sq / nn;
  const double b0 = (sum * sum - sum_sq) / pair_count;

  // Single-coordinate kernel of the degree-1 projector:
  //   k(s, t) = (1-p)/p   if s = t = +1
  //             p/(1-p)   if s = t = -1
  //             -1        otherwise.
  const double k_pp = (1.0 - cube.p) / cube.p;
  const double k_mm = cube.p / (1.0 - cube.p);
  // Pairwise sum decomposes per coordinate into products of the sign-class
  // value sums, minus the diagonal contribution.
  double kernel_sum = 0.0;
  for (int i = 0; i < cube.n; ++i) {
    double plus = 0.0, minus = 0.0, diag = 0.0;
    for (const Sample& s : samples) {
      const double v2 = s.value * s.value;
      if (s.x.bit(i) > 0) {
        plus += s.value;
        diag += k_pp * v2;
      } else {
        minus += s.value;
        diag += k_mm * v2;
      }
    }
    kernel_sum +=
        k_pp * plus * plus + k_mm * minus * minus - 2.0 * plus * minus - diag;
  }
  Degree1Estimate est;
  est.total = total;
  est.b0 = b0;
  est.b1 = kernel_sum / pair_count;
  est.tail2 = est.total - est.b0 - est.b1;
  est.samples = n;
  return est;
}

}  // namespace pbfa
