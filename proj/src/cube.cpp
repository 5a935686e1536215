#include "pbfa/cube.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace pbfa {

CubeConfig CubeConfig::create(int n, double p) {
  if (n < 1 || n > kSampledDimensionCap) {
    throw std::invalid_argument("CubeConfig: n must be in [1, " +
                                std::to_string(kSampledDimensionCap) + "]");
  }
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument(
        "CubeConfig: p must lie strictly inside (0, 1)");
  }
  CubeConfig c;
  c.n = n;
  c.p = p;
  c.mu = 2.0 * p - 1.0;
  c.sigma = std::sqrt(4.0 * p * (1.0 - p));
  return c;
}

Point::Point(std::vector<std::int8_t> bits) : bits_(std::move(bits)) {
  for (std::int8_t b : bits_) {
    if (b != 1 && b != -1) {
      throw std::invalid_argument("Point: coordinates must be +1 or -1");
    }
  }
}

Point Point::from_mask(std::uint64_t mask, int n) {
  if (n < 0 || n > 64) {
    throw std::invalid_argument("Point::from_mask: n must be in [0, 64]");
  }
  if (n < 64 && (mask >> n) != 0) {
    throw std::invalid_argument("Point::from_mask: mask has bits past n");
  }
  std::vector<std::int8_t> bits(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    bits[static_cast<std::size_t>(i)] =
        ((mask >> i) & 1u) ? std::int8_t{1} : std::int8_t{-1};
  }
  Point x;
  x.bits_ = std::move(bits);
  return x;
}

Point Point::from_pattern(std::string_view pattern) {
  std::vector<std::int8_t> bits;
  bits.reserve(pattern.size());
  for (char c : pattern) {
    if (c == '+') {
      bits.push_back(1);
    } else if (c == '-') {
      bits.push_back(-1);
    } else {
      throw std::invalid_argument(
          "Point::from_pattern: only '+' and '-' are allowed");
    }
  }
  if (bits.empty()) {
    throw std::invalid_argument("Point::from_pattern: empty pattern");
  }
  Point x;
  x.bits_ = std::move(bits);
  return x;
}

void Point::set_bit(int i, int value) {
  if (value != 1 && value != -1) {
    throw std::invalid_argument("Point::set_bit: value must be +1 or -1");
  }
  bits_.at(static_cast<std::size_t>(i)) = static_cast<std::int8_t>(value);
}

std::uint64_t Point::to_mask() const {
  if (dimension() > 64) {
    throw capacity_error("Point::to_mask: dimension exceeds 64");
  }
  std::uint64_t mask = 0;
  for (int i = 0; i < dimension(); ++i) {
    if (bit(i) > 0) mask |= (std::uint64_t{1} << i);
  }
  return mask;
}

std::string Point::to_pattern() const {
  std::string s(static_cast<std::size_t>(dimension()), '-');
  for (int i = 0; i < dimension(); ++i) {
    if (bit(i) > 0) s[static_cast<std::size_t>(i)] = '+';
  }
  return s;
}

std::uint64_t point_hash(const Point& x) {
  // FNV-1a over the sign bits; stable across platforms.
  std::uint64_t h = 1469598103934665603ULL;
  for (int i = 0; i < x.dimension(); ++i) {
    h ^= static_cast<std::uint64_t>(x.bit(i) > 0 ? 1 : 0);
    h *= 1099511628211ULL;
  }
  return mix64(h);
}

Subset::Subset(std::initializer_list<int> indices)
    : Subset(from_indices(std::vector<int>(indices))) {}

Subset Subset::from_indices(const std::vector<int>& indices) {
  Subset s;
  for (int i : indices) {
    if (i < 0 || i >= kSampledDimensionCap) {
      throw std::invalid_argument("Subset: index out of range");
    }
    if (i < 64) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (s.lo_ & bit) {
        throw std::invalid_argument("Subset: duplicate index");
      }
      s.lo_ |= bit;
    } else {
      s.hi_.push_back(static_cast<std::uint32_t>(i));
    }
  }
  std::sort(s.hi_.begin(), s.hi_.end());
  if (std::adjacent_find(s.hi_.begin(), s.hi_.end()) != s.hi_.end()) {
    throw std::invalid_argument("Subset: duplicate index");
  }
  return s;
}

Subset Subset::from_mask(std::uint64_t mask) {
  Subset s;
  s.lo_ = mask;
  return s;
}

std::uint64_t Subset::to_mask() const {
  if (!hi_.empty()) {
    throw capacity_error("Subset::to_mask: contains indices past 63");
  }
  return lo_;
}

int Subset::size() const {
  return std::popcount(lo_) + static_cast<int>(hi_.size());
}

bool Subset::contains(int i) const {
  if (i < 0) return false;
  if (i < 64) return (lo_ >> i) & 1u;
  return std::binary_search(hi_.begin(), hi_.end(),
                            static_cast<std::uint32_t>(i));
}

std::vector<int> Subset::indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  std::uint64_t m = lo_;
  while (m != 0) {
    const int i = std::countr_zero(m);
    out.push_back(i);
    m &= m - 1;
  }
  for (std::uint32_t i : hi_) out.push_back(static_cast<int>(i));
  return out;
}

bool Subset::operator==(const Subset& other) const {
  return lo_ == other.lo_ && hi_ == other.hi_;
}

bool Subset::operator<(const Subset& other) const {
  const int a = size();
  const int b = other.size();
  if (a != b) return a < b;
  const std::vector<int> ia = indices();
  const std::vector<int> ib = other.indices();
  return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(),
                                      ib.end());
}

FunctionOracle::FunctionOracle(int n, double bound, Fn fn)
    : n_(n), bound_(bound), fn_(std::move(fn)) {
  if (n < 1 || n > kSampledDimensionCap) {
    throw std::invalid_argument("FunctionOracle: n out of range");
  }
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw std::invalid_argument("FunctionOracle: bound must be positive");
  }
  if (!fn_) {
    throw std::invalid_argument("FunctionOracle: missing evaluation function");
  }
}

FunctionOracle FunctionOracle::from_table(int n, double bound,
                                          std::vector<double> table) {
  if (n < 1 || n > kExactDimensionCap) {
    throw capacity_error("FunctionOracle::from_table: table only up to n = " +
                         std::to_string(kExactDimensionCap));
  }
  if (table.size() != (std::size_t{1} << n)) {
    throw std::invalid_argument(
        "FunctionOracle::from_table: table must hold 2^n values");
  }
  for (double v : table) {
    if (std::abs(v) > bound) {
      throw std::invalid_argument(
          "FunctionOracle::from_table: table value exceeds declared bound");
    }
  }
  auto shared = std::make_shared<const std::vector<double>>(std::move(table));
  FunctionOracle f(
      n, bound, [shared](const Point& x) { return (*shared)[x.to_mask()]; });
  f.table_ = shared;
  return f;
}

const std::vector<double>& FunctionOracle::table() const {
  if (!table_) {
    throw std::invalid_argument("FunctionOracle: no exact table attached");
  }
  return *table_;
}

FunctionOracle FunctionOracle::tabulated() const {
  if (has_table()) return *this;
  if (n_ > kExactDimensionCap) {
    throw capacity_error("FunctionOracle::tabulated: dimension " +
                         std::to_string(n_) + " exceeds exact cap " +
                         std::to_string(kExactDimensionCap));
  }
  const std::size_t size = std::size_t{1} << n_;
  std::vector<double> table(size);
  for (std::uint64_t m = 0; m < size; ++m) {
    table[m] = fn_(Point::from_mask(m, n_));
  }
  return from_table(n_, bound_, std::move(table));
}

Point sample_p_biased(const CubeConfig& cube, CounterRng& rng) {
  std::vector<std::int8_t> bits(static_cast<std::size_t>(cube.n));
  for (int i = 0; i < cube.n; ++i) {
    bits[static_cast<std::size_t>(i)] =
        rng.bernoulli(cube.p) ? std::int8_t{1} : std::int8_t{-1};
  }
  return Point(std::move(bits));
}

Point sample_rho_correlated(const Point& x, double rho, const CubeConfig& cube,
                            CounterRng& rng) {
  if (!(rho >= 0.0) || !(rho <= 1.0)) {
    throw std::invalid_argument(
        "sample_rho_correlated: rho must lie in [0, 1]");
  }
  if (x.dimension() != cube.n) {
    throw std::invalid_argument("sample_rho_correlated: dimension mismatch");
  }
  const double flip_plus = (1.0 - rho) * (1.0 - cube.p);
  const double flip_minus = (1.0 - rho) * cube.p;
  std::vector<std::int8_t> bits(static_cast<std::size_t>(cube.n));
  for (int i = 0; i < cube.n; ++i) {
    const int b = x.bit(i);
    const double flip = (b > 0) ? flip_plus : flip_minus;
    bits[static_cast<std::size_t>(i)] =
        rng.bernoulli(flip) ? static_cast<std::int8_t>(-b)
                            : static_cast<std::int8_t>(b);
  }
  return Point(std::move(bits));
}

Point restrict_point(const Point& x, const Subset& set, int value) {
  if (value != 1 && value != -1) {
    throw std::invalid_argument("restrict_point: value must be +1 or -1");
  }
  Point y = x;
  for (int i : set.indices()) {
    if (i >= x.dimension()) {
      throw std::invalid_argument("restrict_point: index past dimension");
    }
    y.set_bit(i, value);
  }
  return y;
}

double basis_value(const Subset& set, const Point& x, const CubeConfig& cube) {
  double v = 1.0;
  for (int i : set.indices()) {
    if (i >= cube.n) {
      throw std::invalid_argument("basis_value: index past dimension");
    }
    v *= (static_cast<double>(x.bit(i)) - cube.mu) / cube.sigma;
  }
  return v;
}

double point_probability(const CubeConfig& cube, const Point& x) {
  if (x.dimension() != cube.n) {
    throw std::invalid_argument("point_probability: dimension mismatch");
  }
  double prob = 1.0;
  for (int i = 0; i < cube.n; ++i) {
    prob *= (x.bit(i) > 0) ? cube.p : (1.0 - cube.p);
  }
  return prob;
}

std::vector<double> popcount_probabilities(const CubeConfig& cube) {
  std::vector<double> probs(static_cast<std::size_t>(cube.n) + 1);
  for (int c = 0; c <= cube.n; ++c) {
    probs[static_cast<std::size_t>(c)] =
        std::pow(cube.p, c) * std::pow(1.0 - cube.p, cube.n - c);
  }
  return probs;
}

}  // namespace pbfa
