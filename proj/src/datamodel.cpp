#include "pbfa/datamodel.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace pbfa {

Regularizer Regularizer::l1(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("Regularizer::l1: lambda must be >= 0");
  }
  return {Kind::l1, lambda};
}

Regularizer Regularizer::l2(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("Regularizer::l2: lambda must be >= 0");
  }
  return {Kind::l2, lambda};
}

const char* Regularizer::kind_name() const {
  switch (kind) {
    case Kind::l1:
      return "l1";
    case Kind::l2:
      return "l2";
    default:
      return "none";
  }
}

double predict(const Datamodel& m, const Point& x) {
  if (x.dimension() != static_cast<int>(m.weights.size())) {
    throw std::invalid_argument("predict: dimension mismatch");
  }
  double acc = m.intercept;
  for (int i = 0; i < x.dimension(); ++i) {
    if (x.shadow(i)) acc += m.weights[static_cast<std::size_t>(i)];
  }
  return acc;
}

Datamodel fit_closed_form(const Spectrum& s, const Regularizer& reg) {
  const CubeConfig& cube = s.cube();
  const double two_over_sigma = 2.0 / cube.sigma;
  Datamodel m;
  m.p = s.p();
  m.regularizer = reg;
  m.weights.assign(static_cast<std::size_t>(s.dimension()), 0.0);
  const double shrink =
      (reg.kind == Regularizer::Kind::l2)
          ? 1.0 / (1.0 + 4.0 * reg.lambda / (cube.sigma * cube.sigma))
          : 1.0;
  for (int i = 0; i < s.dimension(); ++i) {
    const double c = s.get(Subset{i});
    double w;
    switch (reg.kind) {
      case Regularizer::Kind::l2:
        w = two_over_sigma * shrink * c;
        break;
      case Regularizer::Kind::l1: {
        const double soft = std::abs(c) - reg.lambda / cube.sigma;
        w = soft > 0.0 ? two_over_sigma * (c > 0 ? soft : -soft) : 0.0;
        break;
      }
      default:
        w = two_over_sigma * c;
    }
    m.weights[static_cast<std::size_t>(i)] = w;
  }
  double weight_sum = 0.0;
  for (double w : m.weights) weight_sum += w;
  // Basis identity shadow_i = (sigma/2) phi_i + p ties the intercept to the
  // weights; the same identity holds for the shrunk weights.
  m.intercept = s.get(Subset{}) - 0.5 * (cube.mu + 1.0) * weight_sum;
  return m;
}

double population_residual(const Datamodel& m, const Spectrum& s) {
  if (static_cast<int>(m.weights.size()) != s.dimension()) {
    throw std::invalid_argument("population_residual: dimension mismatch");
  }
  if (m.p != s.p()) {
    throw std::domain_error(
        "population_residual: model and spectrum disagree on p");
  }
  const CubeConfig& cube = s.cube();
  double weight_sum = 0.0;
  for (double w : m.weights) weight_sum += w;
  // Coefficients of the prediction in the orthonormal basis.
  const double pred_empty = m.intercept + 0.5 * (cube.mu + 1.0) * weight_sum;
  double acc = 0.0;
  const double d0 = pred_empty - s.get(Subset{});
  acc += d0 * d0;
  for (int i = 0; i < s.dimension(); ++i) {
    const double di = 0.5 * cube.sigma * m.weights[static_cast<std::size_t>(i)] -
                      s.get(Subset{i});
    acc += di * di;
  }
  return acc + level_weights(s).tail(2);
}

namespace {

struct Design {
  Eigen::MatrixXd x;       // n_samples rows, (dim + 1) cols, col 0 constant
  Eigen::VectorXd y;       // sample values
  Eigen::VectorXd w;       // normalized sample weights
  int dim = 0;
};

Design build_design(const std::vector<Sample>& samples,
                    const FitOptions& opt) {
  if (samples.size() < 2) {
    throw std::invalid_argument("fit_empirical: need at least two samples");
  }
  Design d;
  d.dim = samples.front().x.dimension();
  const auto rows = static_cast<Eigen::Index>(samples.size());
  d.x.resize(rows, d.dim + 1);
  d.y.resize(rows);
  d.w.resize(rows);
  if (!opt.weights.empty() &&
      opt.weights.size() != samples.size()) {
    throw std::invalid_argument(
        "fit_empirical: weight count must match sample count");
  }
  double wsum = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Sample& s = samples[static_cast<std::size_t>(r)];
    if (s.x.dimension() != d.dim) {
      throw std::invalid_argument("fit_empirical: mixed sample dimensions");
    }
    d.x(r, 0) = 1.0;
    for (int i = 0; i < d.dim; ++i) {
      d.x(r, i + 1) = static_cast<double>(s.x.shadow(i));
    }
    d.y(r) = s.value;
    const double w =
        opt.weights.empty() ? 1.0 : opt.weights[static_cast<std::size_t>(r)];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("fit_empirical: weights must be >= 0");
    }
    d.w(r) = w;
    wsum += w;
  }
  if (!(wsum > 0.0)) {
    throw std::invalid_argument("fit_empirical: weights sum to zero");
  }
  d.w /= wsum;
  return d;
}

FitResult solve_quadratic(const Design& d, double p, const Regularizer& reg) {
  const int cols = d.dim + 1;
  if (reg.kind == Regularizer::Kind::none) {
    // QR on the weight-scaled design; rank deficiency is a hard error since
    // the minimizer is not unique without a penalty.
    Eigen::MatrixXd scaled = d.w.array().sqrt().matrix().asDiagonal() * d.x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) {
      throw std::runtime_error(
          "fit_empirical: design is rank deficient; add an l2 penalty");
    }
    Eigen::VectorXd rhs = d.w.array().sqrt().matrix().asDiagonal() * d.y;
    Eigen::VectorXd theta = qr.solve(rhs);
    Datamodel m{p, theta(0),
                std::vector<double>(theta.data() + 1, theta.data() + cols),
                reg};
    return {std::move(m), FitReport{0, true, "normal-equations"}};
  }
  // Ridge: normal equations with the penalty on everything but col 0.
  Eigen::MatrixXd gram = d.x.transpose() * d.w.asDiagonal() * d.x;
  for (int i = 1; i < cols; ++i) gram(i, i) += reg.lambda;
  Eigen::VectorXd rhs = d.x.transpose() * (d.w.asDiagonal() * d.y);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("fit_empirical: normal equations not solvable");
  }
  Eigen::VectorXd theta = ldlt.solve(rhs);
  Datamodel m{p, theta(0),
              std::vector<double>(theta.data() + 1, theta.data() + cols),
              reg};
  return {std::move(m), FitReport{0, true, "normal-equations"}};
}

FitResult solve_lasso(const Design& d, double p, const Regularizer& reg,
                      const FitOptions& opt) {
  const int dim = d.dim;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  double intercept = (d.w.array() * d.y.array()).sum();
  // col_sq[i] = weighted mean of shadow_i^2; zero columns stay at weight 0.
  Eigen::VectorXd col_sq(dim);
  for (int i = 0; i < dim; ++i) {
    col_sq(i) = (d.w.array() * d.x.col(i + 1).array().square()).sum();
  }
  Eigen::VectorXd resid = d.y.array() - intercept;
  FitReport report;
  report.stop = "max-sweeps";
  report.converged = false;
  for (int sweep = 1; sweep <= opt.cd_max_sweeps; ++sweep) {
    double max_update = 0.0;
    const double mean_resid = (d.w.array() * resid.array()).sum();
    intercept += mean_resid;
    resid.array() -= mean_resid;
    max_update = std::abs(mean_resid);
    for (int i = 0; i < dim; ++i) {
      if (col_sq(i) <= 0.0) continue;
      const double corr =
          (d.w.array() * d.x.col(i + 1).array() * resid.array()).sum() +
          col_sq(i) * theta(i);
      const double soft = std::abs(corr) - 0.5 * reg.lambda;
      const double next = soft > 0.0 ? (corr > 0 ? soft : -soft) / col_sq(i)
                                     : 0.0;
      const double delta = next - theta(i);
      if (delta != 0.0) {
        resid -= delta * d.x.col(i + 1);
        theta(i) = next;
      }
      max_update = std::max(max_update, std::abs(delta));
    }
    report.sweeps = sweep;
    if (max_update < opt.cd_tol) {
      report.converged = true;
      report.stop = "converged";
      break;
    }
  }
  Datamodel m{p, intercept,
              std::vector<double>(theta.data(), theta.data() + dim), reg};
  return {std::move(m), std::move(report)};
}

}  // namespace

FitResult fit_empirical(const std::vector<Sample>& samples, double p,
                        const Regularizer& reg, const FitOptions& opt) {
  (void)CubeConfig::create(1, p);  // validates p
  const Design d = build_design(samples, opt);
  if (reg.kind == Regularizer::Kind::l1) {
    return solve_lasso(d, p, reg, opt);
  }
  return solve_quadratic(d, p, reg);
}

nlohmann::json datamodel_to_json(const Datamodel& m) {
  return nlohmann::json{
      {"p", m.p},
      {"intercept", m.intercept},
      {"weights", m.weights},
      {"regularizer",
       {{"kind", m.regularizer.kind_name()}, {"lambda", m.regularizer.lambda}}}};
}

Datamodel datamodel_from_json(const nlohmann::json& j) {
  Datamodel m;
  m.p = j.at("p").get<double>();
  (void)CubeConfig::create(1, m.p);
  m.intercept = j.at("intercept").get<double>();
  m.weights = j.at("weights").get<std::vector<double>>();
  const auto& reg = j.at("regularizer");
  const std::string kind = reg.at("kind").get<std::string>();
  const double lambda = reg.at("lambda").get<double>();
  if (kind == "none") {
    m.regularizer = Regularizer::none();
  } else if (kind == "l1") {
    m.regularizer = Regularizer::l1(lambda);
  } else if (kind == "l2") {
    m.regularizer = Regularizer::l2(lambda);
  } else {
    throw std::invalid_argument("datamodel_from_json: unknown regularizer");
  }
  return m;
}

}  // namespace pbfa
