#pragma once

// Linear models over shadow coordinates: closed-form population fits read off
// the spectrum, the population risk identity, and empirical weighted fits
// (plain, ridge, lasso). The intercept is never penalized.

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pbfa/spectrum.hpp"

namespace pbfa {

struct Regularizer {
  enum class Kind { none, l1, l2 };
  Kind kind = Kind::none;
  double lambda = 0.0;

  static Regularizer none() { return {}; }
  static Regularizer l1(double lambda);
  static Regularizer l2(double lambda);
  const char* kind_name() const;
};

// Prediction intercept + sum_i weights[i] * shadow_i(x).
struct Datamodel {
  double p = 0.5;
  double intercept = 0.0;
  std::vector<double> weights;
  Regularizer regularizer;
};

double predict(const Datamodel& m, const Point& x);

// Population minimizer of E[(f - prediction)^2] plus the chosen penalty,
// read directly off the degree <= 1 coefficients:
//   none: w_i = (2/sigma) c_i
//   l2:   w_i = (2/sigma) c_i / (1 + 4 lambda / sigma^2)
//   l1:   w_i = (2/sigma) sign(c_i) max(|c_i| - lambda/sigma, 0)
// with intercept c_empty - ((mu+1)/2) sum_i w_i in every case.
Datamodel fit_closed_form(const Spectrum& s, const Regularizer& reg);

// Exact quadratic risk E[(f - prediction)^2] of any model against the
// spectrum (penalty not included). Decomposes into basis-coefficient
// mismatches at levels <= 1 plus the level >= 2 mass.
double population_residual(const Datamodel& m, const Spectrum& s);

struct Sample {
  Point x;
  double value = 0.0;
};

struct FitOptions {
  // Per-sample weights; empty means uniform. Normalized to sum 1, so lambda
  // means the same thing for weighted and unweighted fits.
  std::vector<double> weights;
  double cd_tol = 1e-10;  // lasso stop: max coordinate update below this
  int cd_max_sweeps = 10000;
};

struct FitReport {
  int sweeps = 0;
  bool converged = true;
  std::string stop = "closed-form";
};

struct FitResult {
  Datamodel model;
  FitReport report;
};

// Weighted least squares on [1, shadow_1, ..., shadow_n]. none/l2 solve the
// normal equations; l1 runs cyclic coordinate descent with soft
// thresholding. A singular unpenalized design raises an error suggesting l2.
FitResult fit_empirical(const std::vector<Sample>& samples, double p,
                        const Regularizer& reg, const FitOptions& opt = {});

nlohmann::json datamodel_to_json(const Datamodel& m);
Datamodel datamodel_from_json(const nlohmann::json& j);

}  // namespace pbfa
