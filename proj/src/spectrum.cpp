#include "pbfa/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace pbfa {

Spectrum::Spectrum(int n, double p) : n_(n), p_(p) {
  cube_ = CubeConfig::create(n, p);
}

void Spectrum::set(const Subset& s, double value) {
  if (!s.empty() && s.indices().back() >= n_) {
    throw std::invalid_argument("Spectrum::set: index past dimension");
  }
  if (value == 0.0) {
    coeffs_.erase(s);
  } else {
    coeffs_[s] = value;
  }
}

double Spectrum::get(const Subset& s) const {
  const auto it = coeffs_.find(s);
  return it == coeffs_.end() ? 0.0 : it->second;
}

double LevelWeights::tail(int from) const {
  double t = 0.0;
  for (std::size_t k = static_cast<std::size_t>(std::max(from, 0));
       k < mass.size(); ++k) {
    t += mass[k];
  }
  return t;
}

Spectrum exact_transform(const FunctionOracle& f, const CubeConfig& cube) {
  if (f.dimension() != cube.n) {
    throw std::invalid_argument("exact_transform: dimension mismatch");
  }
  if (cube.n > kExactDimensionCap) {
    throw capacity_error("exact_transform: dimension exceeds exact cap");
  }
  if (!f.has_table()) {
    throw std::invalid_argument(
        "exact_transform: oracle must carry an exact table");
  }
  std::vector<double> work = f.table();
  const std::size_t size = work.size();
  const double half_sigma = 0.5 * cube.sigma;
  for (int axis = 0; axis < cube.n; ++axis) {
    const std::size_t stride = std::size_t{1} << axis;
    for (std::size_t base = 0; base < size; base += 2 * stride) {
      for (std::size_t off = 0; off < stride; ++off) {
        const double lo = work[base + off];           // x_axis = -1
        const double hi = work[base + off + stride];  // x_axis = +1
        work[base + off] = (1.0 - cube.p) * lo + cube.p * hi;
        work[base + off + stride] = half_sigma * (hi - lo);
      }
    }
  }
  Spectrum s(cube.n, cube.p);
  for (std::uint64_t m = 0; m < size; ++m) {
    if (work[m] != 0.0) s.set(Subset::from_mask(m), work[m]);
  }
  return s;
}

double evaluate(const Spectrum& s, const Point& x) {
  if (x.dimension() != s.dimension()) {
    throw std::invalid_argument("evaluate: dimension mismatch");
  }
  const CubeConfig& cube = s.cube();
  double acc = 0.0;
  for (const auto& [subset, coeff] : s.coeffs()) {
    acc += coeff * basis_value(subset, x, cube);
  }
  return acc;
}

std::vector<double> synthesize_table(const Spectrum& s) {
  if (s.dimension() > kExactDimensionCap) {
    throw capacity_error("synthesize_table: dimension exceeds exact cap");
  }
  const CubeConfig& cube = s.cube();
  const std::size_t size = std::size_t{1} << s.dimension();
  std::vector<double> work(size, 0.0);
  for (const auto& [subset, coeff] : s.coeffs()) {
    work[subset.to_mask()] = coeff;
  }
  // Inverse of the analysis butterfly: (a, b) -> (a + b phi(-1), a + b phi(+1))
  // with phi(-1) = -2p/sigma and phi(+1) = 2(1-p)/sigma.
  const double phi_minus = (-1.0 - cube.mu) / cube.sigma;
  const double phi_plus = (1.0 - cube.mu) / cube.sigma;
  for (int axis = 0; axis < cube.n; ++axis) {
    const std::size_t stride = std::size_t{1} << axis;
    for (std::size_t base = 0; base < size; base += 2 * stride) {
      for (std::size_t off = 0; off < stride; ++off) {
        const double a = work[base + off];
        const double b = work[base + off + stride];
        work[base + off] = a + b * phi_minus;
        work[base + off + stride] = a + b * phi_plus;
      }
    }
  }
  return work;
}

LevelWeights level_weights(const Spectrum& s) {
  LevelWeights lw;
  lw.mass.assign(static_cast<std::size_t>(s.dimension()) + 1, 0.0);
  for (const auto& [subset, coeff] : s.coeffs()) {
    lw.mass[static_cast<std::size_t>(subset.size())] += coeff * coeff;
    lw.total += coeff * coeff;
  }
  return lw;
}

double exact_noise_stability(const Spectrum& s, double rho) {
  if (!(rho >= 0.0) || !(rho <= 1.0)) {
    throw std::invalid_argument(
        "exact_noise_stability: rho must lie in [0, 1]");
  }
  const LevelWeights lw = level_weights(s);
  // Horner over levels.
  double acc = 0.0;
  for (std::size_t k = lw.mass.size(); k-- > 0;) {
    acc = acc * rho + lw.mass[k];
  }
  return acc;
}

double exact_mean(const FunctionOracle& f, const CubeConfig& cube) {
  if (f.dimension() != cube.n) {
    throw std::invalid_argument("exact_mean: dimension mismatch");
  }
  if (cube.n > kExactDimensionCap) {
    throw capacity_error("exact_mean: dimension exceeds exact cap");
  }
  const std::vector<double>& table =
      f.has_table() ? f.table() : f.tabulated().table();
  const std::vector<double> probs = popcount_probabilities(cube);
  double acc = 0.0;
  for (std::uint64_t m = 0; m < table.size(); ++m) {
    acc += probs[static_cast<std::size_t>(std::popcount(m))] * table[m];
  }
  return acc;
}

double russo_derivative(const FunctionOracle& f, const CubeConfig& cube) {
  if (f.dimension() != cube.n) {
    throw std::invalid_argument("russo_derivative: dimension mismatch");
  }
  if (cube.n > kExactDimensionCap) {
    throw capacity_error("russo_derivative: dimension exceeds exact cap");
  }
  const std::vector<double>& table =
      f.has_table() ? f.table() : f.tabulated().table();
  const std::vector<double> probs = popcount_probabilities(cube);
  // d/dp E[f] = sum_i E[f(x | i -> +1) - f(x | i -> -1)]; the summand does
  // not depend on x_i, so one weighted pass over the table covers all i.
  double acc = 0.0;
  for (std::uint64_t m = 0; m < table.size(); ++m) {
    const double w = probs[static_cast<std::size_t>(std::popcount(m))];
    double diff = 0.0;
    for (int i = 0; i < cube.n; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      diff += table[m | bit] - table[m & ~bit];
    }
    acc += w * diff;
  }
  return acc;
}

LinearityReport linearity_test(const Spectrum& s) {
  const LevelWeights lw = level_weights(s);
  for (std::size_t k = 2; k < lw.mass.size(); ++k) {
    if (lw.mass[k] > kLinearityMassTol) {
      return LinearityReport{false, static_cast<int>(k), lw.mass[k]};
    }
  }
  return LinearityReport{true, 0, 0.0};
}

nlohmann::json spectrum_to_json(const Spectrum& s) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [subset, coeff] : s.coeffs()) {
    nlohmann::json indices = nlohmann::json::array();
    for (int i : subset.indices()) indices.push_back(i + 1);
    coeffs.push_back({{"S", std::move(indices)}, {"v", coeff}});
  }
  return nlohmann::json{
      {"N", s.dimension()}, {"p", s.p()}, {"coeffs", std::move(coeffs)}};
}

Spectrum spectrum_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("N") || !j.contains("p") ||
      !j.contains("coeffs")) {
    throw std::invalid_argument(
        "spectrum_from_json: need fields N, p, coeffs");
  }
  const int n = j.at("N").get<int>();
  const double p = j.at("p").get<double>();
  Spectrum s(n, p);
  for (const auto& entry : j.at("coeffs")) {
    std::vector<int> indices;
    for (const auto& raw : entry.at("S")) {
      const int one_based = raw.get<int>();
      if (one_based < 1 || one_based > n) {
        throw std::invalid_argument(
            "spectrum_from_json: index outside [1, N]");
      }
      indices.push_back(one_based - 1);
    }
    const Subset subset = Subset::from_indices(indices);
    if (s.coeffs().contains(subset)) {
      throw std::invalid_argument("spectrum_from_json: duplicate subset");
    }
    s.set(subset, entry.at("v").get<double>());
  }
  return s;
}

std::string spectrum_to_text(const Spectrum& s) {
  std::string out;
  char buf[64];
  for (const auto& [subset, coeff] : s.coeffs()) {
    std::string key;
    const std::vector<int> indices = subset.indices();
    if (indices.empty()) {
      key = "-";
    } else {
      for (std::size_t k = 0; k < indices.size(); ++k) {
        if (k > 0) key += ',';
        key += std::to_string(indices[k] + 1);
      }
    }
    std::snprintf(buf, sizeof(buf), "%.17g", coeff);
    out += key;
    out += '\t';
    out += buf;
    out += '\n';
  }
  return out;
}

}  // namespace pbfa
