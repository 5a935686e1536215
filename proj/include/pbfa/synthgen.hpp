#pragma once

// Seeded generators for benchmark functions: random sparse spectra, planted
// linear functions with a controlled nonlinear remainder, threshold models,
// literal value tables, and a reproducible noisy-evaluation wrapper.

#include <optional>
#include <variant>

#include <nlohmann/json_fwd.hpp>

#include "pbfa/spectrum.hpp"
#include "pbfa/threshold.hpp"

namespace pbfa {

struct RandomSpectrumSpec {
  int n = 4;
  double p = 0.5;
  int max_degree = 2;   // largest subset size drawn
  int sparsity = 4;     // number of coefficients drawn
  double scale = 1.0;   // coefficients are uniform in [-scale, scale]
};

struct PlantedLinearSpec {
  int n = 4;
  double p = 0.5;
  double intercept = 0.0;
  std::vector<double> weights;  // shadow-coordinate weights, size n
  // Exact level >= 2 mass, planted on the first two coordinates.
  double nonlinear_mass = 0.0;
};

struct ThresholdSpec {
  ThresholdModel model;
};

struct CustomTableSpec {
  int n = 1;
  double p = 0.5;
  double bound = 1.0;
  std::vector<double> table;  // 2^n values indexed by point mask
};

struct SyntheticSpec {
  std::variant<RandomSpectrumSpec, PlantedLinearSpec, ThresholdSpec,
               CustomTableSpec>
      family;
  std::uint64_t seed = 0;
};

struct SyntheticInstance {
  CubeConfig cube;
  FunctionOracle oracle;
  // Present when the family is defined by an explicit spectrum.
  std::optional<Spectrum> spectrum;
};

// Deterministic in the spec (including its seed). Spectrum-backed families
// declare the sup-norm bound sum_S |c_S| max|phi_S|; at n <= 12 the bound is
// additionally checked against full enumeration.
SyntheticInstance generate(const SyntheticSpec& spec);

// Oracle computing base(x) + mean of `repeats` Gaussian draws of stddev
// noise_std, clipped to the inflated bound. The noise stream is keyed by
// (stream_seed, point hash), so evaluation stays a deterministic function of
// the point. Bound inflation: 5 standard errors of the averaged noise.
FunctionOracle noisy_wrapper(const FunctionOracle& f, double noise_std,
                             int repeats, std::uint64_t stream_seed);

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

}  // namespace pbfa
