#pragma once

// Sparse orthonormal-basis expansion of a function on the biased cube,
// the exact O(n 2^n) analysis / synthesis transforms, level weights, exact
// noise stability, the bias derivative of the mean, and a linearity check.

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pbfa/cube.hpp"

namespace pbfa {

// Coefficient map S -> <f, phi_S>. Absent entries are exactly zero; values
// are never pruned by magnitude (callers that want a display cutoff apply
// their own). Keys iterate level-major, which fixes serialization order.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(int n, double p);

  int dimension() const { return n_; }
  double p() const { return p_; }
  const CubeConfig& cube() const { return cube_; }

  // Storing an exact zero erases the entry; absent already means zero.
  void set(const Subset& s, double value);
  double get(const Subset& s) const;
  const std::map<Subset, double>& coeffs() const { return coeffs_; }

 private:
  int n_ = 0;
  double p_ = 0.5;
  CubeConfig cube_;
  std::map<Subset, double> coeffs_;
};

struct LevelWeights {
  std::vector<double> mass;  // mass[k] = sum over |S| = k of coefficient^2
  double total = 0.0;
  // Mass at levels >= from.
  double tail(int from) const;
};

struct LinearityReport {
  bool linear = true;
  int witness_level = 0;   // smallest level >= 2 carrying mass, 0 if none
  double witness_mass = 0.0;
};

// Mass at or above level 2 below this is considered exactly linear.
inline constexpr double kLinearityMassTol = 1e-10;

// Exact change of basis from a full value table. Requires an attached table
// and n <= kExactDimensionCap. Butterfly over one coordinate at a time:
// (f_minus, f_plus) -> ((1-p) f_minus + p f_plus, (sigma/2)(f_plus - f_minus)).
Spectrum exact_transform(const FunctionOracle& f, const CubeConfig& cube);

// Pointwise synthesis sum_S coeff_S * phi_S(x).
double evaluate(const Spectrum& s, const Point& x);

// Inverse transform to a full value table (n <= kExactDimensionCap).
std::vector<double> synthesize_table(const Spectrum& s);

LevelWeights level_weights(const Spectrum& s);

// h(rho) = sum_k mass[k] rho^k, exact from the spectrum.
double exact_noise_stability(const Spectrum& s, double rho);

// Derivative of E[f] with respect to the bias p, computed by exact
// enumeration of the per-coordinate discrete derivatives. Equals the sum of
// the average influences.
double russo_derivative(const FunctionOracle& f, const CubeConfig& cube);

// E[f] under the cube's measure, by exact enumeration of the table.
double exact_mean(const FunctionOracle& f, const CubeConfig& cube);

LinearityReport linearity_test(const Spectrum& s);

// JSON document {"N": n, "p": p, "coeffs": [{"S": [1-based indices], "v": c}]}
// in level-major order.
nlohmann::json spectrum_to_json(const Spectrum& s);
Spectrum spectrum_from_json(const nlohmann::json& j);

// Line-oriented "indices <TAB> value" dump for quick diffing; the empty set
// prints as "-". 17 significant digits.
std::string spectrum_to_text(const Spectrum& s);

}  // namespace pbfa
