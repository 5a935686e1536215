#include "pbfa/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

namespace pbfa {

namespace {

// Sup-norm bound of a sparse expansion: each basis factor is at most
// max(2p, 2(1-p)) / sigma in absolute value.
double spectrum_sup_bound(const Spectrum& s) {
  const CubeConfig& cube = s.cube();
  const double factor =
      2.0 * std::max(cube.p, 1.0 - cube.p) / cube.sigma;
  double bound = 0.0;
  for (const auto& [subset, coeff] : s.coeffs()) {
    bound += std::abs(coeff) * std::pow(factor, subset.size());
  }
  return bound;
}

FunctionOracle oracle_from_spectrum(const Spectrum& s) {
  const double bound = std::max(spectrum_sup_bound(s), 1e-300);
  Spectrum copy = s;
  FunctionOracle f(s.dimension(), bound,
                   [copy](const Point& x) { return evaluate(copy, x); });
  if (s.dimension() <= 12) {
    // Cheap at this size; catches a mis-declared bound immediately.
    const std::vector<double> table = synthesize_table(s);
    for (double v : table) {
      if (std::abs(v) > bound * (1.0 + 1e-12)) {
        throw std::logic_error("generate: declared bound violated");
      }
    }
  }
  return f;
}

Spectrum random_spectrum(const RandomSpectrumSpec& spec, std::uint64_t seed) {
  if (spec.max_degree < 0 || spec.max_degree > spec.n) {
    throw std::invalid_argument(
        "generate: max_degree must lie in [0, n]");
  }
  if (spec.sparsity < 1) {
    throw std::invalid_argument("generate: sparsity must be >= 1");
  }
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) {
    throw std::invalid_argument("generate: scale must be positive");
  }
  // Cannot ask for more distinct subsets than exist.
  double available = 0.0;
  for (int k = 0; k <= spec.max_degree && available < 1e9; ++k) {
    double c = 1.0;
    for (int j = 0; j < k; ++j) {
      c *= static_cast<double>(spec.n - j) / static_cast<double>(j + 1);
    }
    available += c;
  }
  if (static_cast<double>(spec.sparsity) > available) {
    throw std::invalid_argument(
        "generate: sparsity exceeds the number of admissible subsets");
  }
  Spectrum s(spec.n, spec.p);
  CounterRng rng(seed, 0x73796e7468ULL);
  std::set<Subset> chosen;
  while (static_cast<int>(chosen.size()) < spec.sparsity) {
    const int size =
        static_cast<int>(rng.next_u64() %
                         static_cast<std::uint64_t>(spec.max_degree + 1));
    std::vector<int> indices;
    while (static_cast<int>(indices.size()) < size) {
      const int i = static_cast<int>(
          rng.next_u64() % static_cast<std::uint64_t>(spec.n));
      if (std::find(indices.begin(), indices.end(), i) == indices.end()) {
        indices.push_back(i);
      }
    }
    const Subset subset = Subset::from_indices(indices);
    if (!chosen.insert(subset).second) continue;
    double coeff = 0.0;
    while (coeff == 0.0) {
      coeff = (2.0 * rng.next_unit() - 1.0) * spec.scale;
    }
    s.set(subset, coeff);
  }
  return s;
}

Spectrum planted_linear(const PlantedLinearSpec& spec) {
  if (static_cast<int>(spec.weights.size()) != spec.n) {
    throw std::invalid_argument(
        "generate: planted weights must have one entry per coordinate");
  }
  if (!(spec.nonlinear_mass >= 0.0)) {
    throw std::invalid_argument("generate: nonlinear_mass must be >= 0");
  }
  if (spec.nonlinear_mass > 0.0 && spec.n < 2) {
    throw std::invalid_argument(
        "generate: nonlinear remainder needs at least two coordinates");
  }
  const CubeConfig cube = CubeConfig::create(spec.n, spec.p);
  Spectrum s(spec.n, spec.p);
  double weight_sum = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    const double w = spec.weights[static_cast<std::size_t>(i)];
    weight_sum += w;
    s.set(Subset{i}, 0.5 * cube.sigma * w);
  }
  s.set(Subset{}, spec.intercept + 0.5 * (cube.mu + 1.0) * weight_sum);
  if (spec.nonlinear_mass > 0.0) {
    s.set(Subset{0, 1}, std::sqrt(spec.nonlinear_mass));
  }
  return s;
}

}  // namespace

SyntheticInstance generate(const SyntheticSpec& spec) {
  if (const auto* r = std::get_if<RandomSpectrumSpec>(&spec.family)) {
    Spectrum s = random_spectrum(*r, spec.seed);
    return {s.cube(), oracle_from_spectrum(s), std::move(s)};
  }
  if (const auto* pl = std::get_if<PlantedLinearSpec>(&spec.family)) {
    Spectrum s = planted_linear(*pl);
    return {s.cube(), oracle_from_spectrum(s), std::move(s)};
  }
  if (const auto* t = std::get_if<ThresholdSpec>(&spec.family)) {
    const CubeConfig cube = CubeConfig::create(t->model.n, t->model.p);
    return {cube, sigmoid_oracle(t->model), std::nullopt};
  }
  const auto& c = std::get<CustomTableSpec>(spec.family);
  const CubeConfig cube = CubeConfig::create(c.n, c.p);
  return {cube, FunctionOracle::from_table(c.n, c.bound, c.table),
          std::nullopt};
}

FunctionOracle noisy_wrapper(const FunctionOracle& f, double noise_std,
                             int repeats, std::uint64_t stream_seed) {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("noisy_wrapper: noise_std must be >= 0");
  }
  if (repeats < 1) {
    throw std::invalid_argument("noisy_wrapper: repeats must be >= 1");
  }
  const double stderr_margin =
      5.0 * noise_std / std::sqrt(static_cast<double>(repeats));
  const double bound = f.bound() + stderr_margin;
  const FunctionOracle base = f;
  return FunctionOracle(
      f.dimension(), bound,
      [base, noise_std, repeats, stream_seed, bound](const Point& x) {
        CounterRng rng(stream_seed, point_hash(x));
        double noise = 0.0;
        for (int r = 0; r < repeats; ++r) {
          noise += rng.next_gaussian();
        }
        noise *= noise_std / static_cast<double>(repeats);
        return std::clamp(base(x) + noise, -bound, bound);
      });
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  if (const auto* r = std::get_if<RandomSpectrumSpec>(&spec.family)) {
    j["family"] = "random_spectrum";
    j["N"] = r->n;
    j["p"] = r->p;
    j["max_degree"] = r->max_degree;
    j["sparsity"] = r->sparsity;
    j["scale"] = r->scale;
  } else if (const auto* pl = std::get_if<PlantedLinearSpec>(&spec.family)) {
    j["family"] = "planted_linear";
    j["N"] = pl->n;
    j["p"] = pl->p;
    j["intercept"] = pl->intercept;
    j["weights"] = pl->weights;
    j["nonlinear_mass"] = pl->nonlinear_mass;
  } else if (const auto* t = std::get_if<ThresholdSpec>(&spec.family)) {
    j["family"] = "threshold";
    j["N"] = t->model.n;
    j["p"] = t->model.p;
    nlohmann::json group = nlohmann::json::array();
    for (int i : t->model.group.indices()) group.push_back(i + 1);
    j["group"] = std::move(group);
    j["beta"] = t->model.beta;
    j["alpha"] = std::isinf(t->model.alpha) ? nlohmann::json("inf")
                                            : nlohmann::json(t->model.alpha);
  } else {
    const auto& c = std::get<CustomTableSpec>(spec.family);
    j["family"] = "custom_table";
    j["N"] = c.n;
    j["p"] = c.p;
    j["bound"] = c.bound;
    j["table"] = c.table;
  }
  return j;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec spec;
  spec.seed = j.value("seed", std::uint64_t{0});
  const std::string family = j.at("family").get<std::string>();
  if (family == "random_spectrum") {
    RandomSpectrumSpec r;
    r.n = j.at("N").get<int>();
    r.p = j.at("p").get<double>();
    r.max_degree = j.value("max_degree", r.max_degree);
    r.sparsity = j.value("sparsity", r.sparsity);
    r.scale = j.value("scale", r.scale);
    spec.family = r;
  } else if (family == "planted_linear") {
    PlantedLinearSpec pl;
    pl.n = j.at("N").get<int>();
    pl.p = j.at("p").get<double>();
    pl.intercept = j.value("intercept", 0.0);
    pl.weights = j.at("weights").get<std::vector<double>>();
    pl.nonlinear_mass = j.value("nonlinear_mass", 0.0);
    spec.family = pl;
  } else if (family == "threshold") {
    std::vector<int> zero_based;
    for (const auto& raw : j.at("group")) {
      zero_based.push_back(raw.get<int>() - 1);
    }
    double alpha;
    if (j.at("alpha").is_string()) {
      if (j.at("alpha").get<std::string>() != "inf") {
        throw std::invalid_argument(
            "synthetic_spec_from_json: alpha must be a number or \"inf\"");
      }
      alpha = std::numeric_limits<double>::infinity();
    } else {
      alpha = j.at("alpha").get<double>();
    }
    spec.family = ThresholdSpec{ThresholdModel::create(
        j.at("N").get<int>(), Subset::from_indices(zero_based),
        j.at("beta").get<double>(), alpha, j.at("p").get<double>())};
  } else if (family == "custom_table") {
    CustomTableSpec c;
    c.n = j.at("N").get<int>();
    c.p = j.at("p").get<double>();
    c.bound = j.at("bound").get<double>();
    c.table = j.at("table").get<std::vector<double>>();
    spec.family = c;
  } else {
    throw std::invalid_argument("synthetic_spec_from_json: unknown family");
  }
  return spec;
}

}  // namespace pbfa
