#pragma once

// Domain layer: the p-biased hypercube {-1,+1}^n, its points, coordinate
// subsets, bounded function oracles, and the sampling / restriction /
// basis-evaluation primitives. Coordinates are 0-based throughout the C++
// API; serialized artifacts (JSON, CSV, patterns) use 1-based indices.

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pbfa/rng.hpp"

namespace pbfa {

// Work that needs a full 2^n table stops here: past n = 24 the table alone
// is over 128 MiB and every exact pass is billions of operations.
inline constexpr int kExactDimensionCap = 24;

// Sampled-mode dimension cap; sorted index lists handle subsets past the
// 64-bit mask range.
inline constexpr int kSampledDimensionCap = 10000;

class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CubeConfig {
  int n = 0;          // number of coordinates
  double p = 0.5;     // Pr[x_i = +1], strictly inside (0, 1)
  double mu = 0.0;    // E[x_i] = 2p - 1
  double sigma = 1.0; // stddev of x_i = sqrt(4 p (1-p))

  // Validates n and p; the degenerate biases p = 0 and p = 1 are rejected
  // because the basis normalization divides by sigma.
  static CubeConfig create(int n, double p);
};

// A point of {-1,+1}^n. The shadow coordinate (x_i + 1) / 2 in {0,1} is the
// representation linear models are fit against.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<std::int8_t> bits);

  // Bit i of mask set <=> coordinate i equals +1. Requires n <= 64.
  static Point from_mask(std::uint64_t mask, int n);
  // One '+' or '-' per coordinate, e.g. "+-+".
  static Point from_pattern(std::string_view pattern);

  int dimension() const { return static_cast<int>(bits_.size()); }
  int bit(int i) const { return bits_[static_cast<std::size_t>(i)]; }
  int shadow(int i) const { return (bit(i) + 1) / 2; }
  void set_bit(int i, int value);

  std::uint64_t to_mask() const;  // requires dimension() <= 64
  std::string to_pattern() const;

  bool operator==(const Point& other) const { return bits_ == other.bits_; }

 private:
  std::vector<std::int8_t> bits_;
};

// Order-independent hash of a point, used to key reproducible per-point
// noise streams.
std::uint64_t point_hash(const Point& x);

// A set of coordinate indices. Indices below 64 live in a bit mask; larger
// ones (legal up to kSampledDimensionCap) in a sorted list.
class Subset {
 public:
  Subset() = default;
  Subset(std::initializer_list<int> indices);

  static Subset from_indices(const std::vector<int>& indices);
  static Subset from_mask(std::uint64_t mask);

  std::uint64_t to_mask() const;  // requires every index < 64
  int size() const;
  bool empty() const { return size() == 0; }
  bool contains(int i) const;
  std::vector<int> indices() const;  // ascending

  bool operator==(const Subset& other) const;
  // Level-major order: smaller sets first, then lexicographic on indices.
  bool operator<(const Subset& other) const;

 private:
  std::uint64_t lo_ = 0;            // indices 0..63
  std::vector<std::uint32_t> hi_;   // sorted, unique, each >= 64
};

// Real-valued function on the cube with a declared sup-norm bound. The bound
// is what Hoeffding half-widths are computed from, so callers must declare it
// honestly. An exact value table (indexed by point mask) is representable
// only up to kExactDimensionCap.
class FunctionOracle {
 public:
  using Fn = std::function<double(const Point&)>;

  FunctionOracle() = default;
  FunctionOracle(int n, double bound, Fn fn);
  static FunctionOracle from_table(int n, double bound,
                                   std::vector<double> table);

  double operator()(const Point& x) const { return fn_(x); }
  int dimension() const { return n_; }
  double bound() const { return bound_; }

  bool has_table() const { return table_ != nullptr; }
  const std::vector<double>& table() const;  // throws without a table
  // Materializes the table by full enumeration.
  FunctionOracle tabulated() const;

 private:
  int n_ = 0;
  double bound_ = 0.0;
  Fn fn_;
  std::shared_ptr<const std::vector<double>> table_;
};

// One coordinate drawn +1 with probability p, independently.
Point sample_p_biased(const CubeConfig& cube, CounterRng& rng);

// Resamples each coordinate of x through the rho-correlated channel:
// a +1 flips with probability (1-rho)(1-p), a -1 with probability (1-rho)p.
// This keeps the p-biased marginal for every rho in [0, 1].
Point sample_rho_correlated(const Point& x, double rho, const CubeConfig& cube,
                            CounterRng& rng);

// Copy of x with every coordinate in set forced to value (+1 or -1).
Point restrict_point(const Point& x, const Subset& set, int value);

// Orthonormal product basis value: prod_{i in set} (x_i - mu) / sigma.
double basis_value(const Subset& set, const Point& x, const CubeConfig& cube);

// Probability of drawing x under the product measure.
double point_probability(const CubeConfig& cube, const Point& x);

// probs[c] = p^c (1-p)^(n-c): probability of any point with c coordinates at
// +1. Backbone of exact enumeration passes.
std::vector<double> popcount_probabilities(const CubeConfig& cube);

}  // namespace pbfa
