#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "pbfa/spectrum.hpp"

using namespace pbfa;

namespace {

std::vector<double> random_table(int n, std::uint64_t seed) {
  CounterRng rng(seed, 0x7461626cULL);
  std::vector<double> t(std::size_t{1} << n);
  for (double& v : t) v = 2.0 * rng.next_unit() - 1.0;
  return t;
}

FunctionOracle shadow_oracle(int n, double /*p*/) {
  // f(x) = shadow of coordinate 0.
  std::vector<double> t(std::size_t{1} << n);
  for (std::uint64_t m = 0; m < t.size(); ++m) t[m] = double(m & 1u);
  return FunctionOracle::from_table(n, 1.0, std::move(t));
}

}  // namespace

TEST_CASE("transform of a single shadow coordinate is the textbook pair") {
  const CubeConfig cube = CubeConfig::create(4, 0.3);
  const Spectrum s = exact_transform(shadow_oracle(4, 0.3), cube);
  // shadow = (sigma/2) phi_{0} + p.
  CHECK(s.get(Subset{}) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(s.get(Subset{0}) ==
        doctest::Approx(0.45825756949558400).epsilon(1e-15));
  // Nothing else carries weight.
  double off = 0.0;
  for (const auto& [subset, coeff] : s.coeffs()) {
    if (!(subset == Subset{}) && !(subset == Subset{0})) {
      off += std::abs(coeff);
    }
  }
  CHECK(off < 1e-14);
}

TEST_CASE("transform equals direct inner products on random tables") {
  for (double p : {0.3, 0.5, 0.8}) {
    const int n = 8;
    const CubeConfig cube = CubeConfig::create(n, p);
    const std::vector<double> table = random_table(n, 11 + std::uint64_t(p * 10));
    const Spectrum s =
        exact_transform(FunctionOracle::from_table(n, 1.0, table), cube);
    double worst = 0.0;
    for (std::uint64_t mask = 0; mask < (1u << n); ++mask) {
      const double direct = oracle::fourier_coefficient(table, mask, n, p);
      worst = std::max(worst,
                       std::abs(direct - s.get(Subset::from_mask(mask))));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("analysis and synthesis are mutually inverse") {
  const int n = 8;
  const CubeConfig cube = CubeConfig::create(n, 0.62);
  const std::vector<double> table = random_table(n, 99);
  const Spectrum s =
      exact_transform(FunctionOracle::from_table(n, 1.0, table), cube);

  const std::vector<double> back = synthesize_table(s);
  double worst = 0.0;
  for (std::size_t m = 0; m < table.size(); ++m) {
    worst = std::max(worst, std::abs(back[m] - table[m]));
  }
  CHECK(worst < 1e-12);

  // Pointwise evaluation agrees with the table everywhere.
  worst = 0.0;
  for (std::uint64_t m = 0; m < table.size(); ++m) {
    const Point x = Point::from_mask(m, n);
    worst = std::max(worst, std::abs(evaluate(s, x) - table[m]));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("Parseval holds against enumerated second moments") {
  for (double p : {0.2, 0.5, 0.9}) {
    const int n = 7;
    const CubeConfig cube = CubeConfig::create(n, p);
    const std::vector<double> table = random_table(n, 7 + std::uint64_t(p * 100));
    const Spectrum s =
        exact_transform(FunctionOracle::from_table(n, 1.0, table), cube);
    const LevelWeights lw = level_weights(s);
    CHECK(lw.total ==
          doctest::Approx(oracle::second_moment(table, n, p)).epsilon(1e-12));
    CHECK(lw.tail(0) == doctest::Approx(lw.total).epsilon(1e-15));
  }
}

TEST_CASE("level weights of a shadow coordinate split as p^2 and p(1-p)") {
  const CubeConfig cube = CubeConfig::create(5, 0.3);
  const Spectrum s = exact_transform(shadow_oracle(5, 0.3), cube);
  const LevelWeights lw = level_weights(s);
  CHECK(lw.mass[0] == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(lw.mass[1] == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(lw.tail(2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(lw.total == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("exact noise stability matches the joint-law enumeration") {
  const int n = 6;
  for (double p : {0.25, 0.6}) {
    const CubeConfig cube = CubeConfig::create(n, p);
    const std::vector<double> table = random_table(n, 31 + std::uint64_t(p * 10));
    const Spectrum s =
        exact_transform(FunctionOracle::from_table(n, 1.0, table), cube);
    for (double rho : {0.0, 0.25, 0.6, 1.0}) {
      CHECK(exact_noise_stability(s, rho) ==
            doctest::Approx(oracle::noise_stability_joint(table, n, p, rho))
                .epsilon(1e-12));
    }
  }
  const Spectrum s = exact_transform(
      shadow_oracle(n, 0.5), CubeConfig::create(n, 0.5));
  CHECK_THROWS_AS(exact_noise_stability(s, 1.5), std::invalid_argument);
}

TEST_CASE("bias derivative of the mean equals the influence sum") {
  const int n = 7;
  const std::vector<double> table = random_table(n, 5150);
  for (double p : {0.3, 0.5, 0.71}) {
    const CubeConfig cube = CubeConfig::create(n, p);
    const FunctionOracle f = FunctionOracle::from_table(n, 1.0, table);
    const double direct = russo_derivative(f, cube);
    // Route 2: (2/sigma) sum of level-1 coefficients.
    const Spectrum s = exact_transform(f, cube);
    double level1 = 0.0;
    for (int i = 0; i < n; ++i) level1 += s.get(Subset{i});
    CHECK(direct ==
          doctest::Approx((2.0 / cube.sigma) * level1).epsilon(1e-11));
    // Route 3: independent finite difference of the enumerated mean.
    CHECK(direct == doctest::Approx(oracle::mean_derivative_fd(table, n, p))
                        .epsilon(1e-6));
  }
  // A single shadow coordinate has derivative exactly 1 at every p.
  const CubeConfig cube = CubeConfig::create(n, 0.3);
  CHECK(russo_derivative(shadow_oracle(n, 0.3), cube) ==
        doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("exact mean matches enumeration and powers the derivative check") {
  const int n = 6;
  const std::vector<double> table = random_table(n, 404);
  const CubeConfig cube = CubeConfig::create(n, 0.37);
  CHECK(exact_mean(FunctionOracle::from_table(n, 1.0, table), cube) ==
        doctest::Approx(oracle::mean(table, n, 0.37)).epsilon(1e-13));
}

TEST_CASE("linearity test certifies degree-1 functions and finds planted mass") {
  Spectrum linear(6, 0.4);
  linear.set(Subset{}, 0.7);
  linear.set(Subset{2}, -0.3);
  linear.set(Subset{5}, 0.1);
  const LinearityReport ok = linearity_test(linear);
  CHECK(ok.linear);
  CHECK(ok.witness_level == 0);

  Spectrum planted = linear;
  planted.set(Subset{1, 3, 4}, 1e-3);  // mass 1e-6 at level 3
  const LinearityReport bad = linearity_test(planted);
  CHECK_FALSE(bad.linear);
  CHECK(bad.witness_level == 3);
  CHECK(bad.witness_mass == doctest::Approx(1e-6).epsilon(1e-12));

  // Mass below the certification cutoff stays linear.
  Spectrum tiny = linear;
  tiny.set(Subset{1, 3}, 1e-6);  // mass 1e-12
  CHECK(linearity_test(tiny).linear);
}

TEST_CASE("spectra serialize to canonical JSON with 1-based indices") {
  Spectrum s(3, 0.25);
  s.set(Subset{0, 2}, -0.5);
  s.set(Subset{}, 1.25);
  s.set(Subset{1}, 0.75);
  const nlohmann::json j = spectrum_to_json(s);
  CHECK(j["N"] == 3);
  CHECK(j["p"] == 0.25);
  REQUIRE(j["coeffs"].size() == 3);
  // Level-major order: {}, {2}, {1,3} in 1-based form.
  CHECK(j["coeffs"][0]["S"] == nlohmann::json::array());
  CHECK(j["coeffs"][1]["S"] == nlohmann::json::array({2}));
  CHECK(j["coeffs"][2]["S"] == nlohmann::json::array({1, 3}));

  const Spectrum back = spectrum_from_json(j);
  CHECK(back.dimension() == 3);
  CHECK(back.p() == 0.25);
  CHECK(back.get(Subset{0, 2}) == -0.5);
  CHECK(back.get(Subset{1}) == 0.75);
  CHECK(back.get(Subset{}) == 1.25);
  CHECK(back.coeffs().size() == 3);

  // Validation: indices outside [1, N] and duplicate subsets are rejected.
  nlohmann::json bad = j;
  bad["coeffs"][1]["S"] = {4};
  CHECK_THROWS_AS(spectrum_from_json(bad), std::invalid_argument);
  bad = j;
  bad["coeffs"][1]["S"] = {0};
  CHECK_THROWS_AS(spectrum_from_json(bad), std::invalid_argument);
  bad = j;
  bad["coeffs"][1]["S"] = nlohmann::json::array();
  CHECK_THROWS_AS(spectrum_from_json(bad), std::invalid_argument);
}

TEST_CASE("text dump is line-oriented with the empty set spelled as dash") {
  Spectrum s(3, 0.5);
  s.set(Subset{}, 0.5);
  s.set(Subset{0, 1}, -0.25);
  CHECK(spectrum_to_text(s) == "-\t0.5\n1,2\t-0.25\n");
}

TEST_CASE("spectrum builders validate inputs") {
  Spectrum s(3, 0.5);
  CHECK_THROWS_AS(s.set(Subset{3}, 1.0), std::invalid_argument);
  s.set(Subset{1}, 1.0);
  s.set(Subset{1}, 0.0);  // exact zero erases
  CHECK(s.coeffs().empty());

  const FunctionOracle no_table(3, 1.0, [](const Point&) { return 0.0; });
  CHECK_THROWS_AS(exact_transform(no_table, CubeConfig::create(3, 0.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(exact_transform(shadow_oracle(3, 0.5),
                                  CubeConfig::create(4, 0.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluate(s, Point::from_pattern("++")),
                  std::invalid_argument);
}
