// Batch front end for the p-biased analysis library: structured config in,
// plot-ready tables out.
//
// Conventions shared by every subcommand:
//   - `--config FILE` loads a JSON document of parameters; explicitly passed
//     flags override file values; the merged result is echoed into every
//     output, so a run can be reproduced from its own artifact.
//   - JSON outputs carry meta = {tool, version, command, seed, partitions,
//     config}. CSV outputs start with '# ' comment lines carrying the same
//     fields, then a header row. CSV numbers use 17 significant digits and
//     '.' as the decimal separator.
//   - Coordinates are 1-based in all files and flags.
//   - Exit codes: 0 success, 1 validation/usage error, 2 runtime or capacity
//     error. Failures emit one machine-parseable JSON line on stderr.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pbfa/cube.hpp"
#include "pbfa/datamodel.hpp"
#include "pbfa/influence.hpp"
#include "pbfa/spectrum.hpp"
#include "pbfa/stability.hpp"
#include "pbfa/synthgen.hpp"
#include "pbfa/threshold.hpp"

namespace {

using nlohmann::json;
using namespace pbfa;

constexpr const char* kTool = "pbfa";
constexpr const char* kVersion = "0.1.0";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

json read_json_file(const std::string& path) {
  return json::parse(read_text_file(path));  // parse_error -> validation
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

json make_meta(const std::string& command, std::uint64_t seed, int partitions,
               const json& config) {
  json meta;
  meta["tool"] = kTool;
  meta["version"] = kVersion;
  meta["command"] = command;
  meta["seed"] = seed;
  meta["partitions"] = partitions;
  meta["config"] = config;
  return meta;
}

std::string csv_meta(const std::string& command, std::uint64_t seed,
                     int partitions, const json& config,
                     const std::vector<std::string>& extra = {}) {
  std::ostringstream out;
  out << "# " << kTool << ' ' << kVersion << ' ' << command << '\n';
  out << "# seed: " << seed << '\n';
  out << "# partitions: " << partitions << '\n';
  out << "# config: " << config.dump() << '\n';
  for (const std::string& line : extra) out << "# " << line << '\n';
  return out.str();
}

// Declared keys with defaults; a config file may set any of them and an
// explicitly passed flag wins over the file.
class OptBinder {
 public:
  template <class T>
  void bind(CLI::Option* opt, const std::string& key, T* storage) {
    defaults_[key] = *storage;
    entries_.push_back({key, opt, [storage]() { return json(*storage); }});
  }

  // Key reachable from a config file only (no attached flag).
  template <class T>
  void declare(const std::string& key, const T& value) {
    defaults_[key] = value;
  }

  json resolve(const std::string& config_path) const {
    json resolved = defaults_;
    if (!config_path.empty()) {
      const json file = read_json_file(config_path);
      if (!file.is_object()) {
        throw std::invalid_argument("config file must hold a JSON object");
      }
      for (const auto& [key, value] : file.items()) {
        if (!resolved.contains(key)) {
          throw std::invalid_argument("unknown config key: " + key);
        }
        resolved[key] = value;
      }
    }
    for (const Entry& e : entries_) {
      if (e.opt->count() > 0) resolved[e.key] = e.get();
    }
    return resolved;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<json()> get;
  };
  json defaults_ = json::object();
  std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Input formats.

double parse_strict_double(const std::string& text, const char* where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(where) + ": bad number '" + text +
                                "'");
  }
  while (used < text.size() &&
         std::isspace(static_cast<unsigned char>(text[used]))) {
    ++used;
  }
  if (used != text.size()) {
    throw std::invalid_argument(std::string(where) + ": bad number '" + text +
                                "'");
  }
  return v;
}

// {"N": n, "p": bias, "values": [2^N], "bound": optional}. Mask bit b set
// means coordinate b+1 equals +1.
struct TableFile {
  CubeConfig cube;
  FunctionOracle oracle;
};

TableFile read_table_json(const std::string& path) {
  const json j = read_json_file(path);
  const int n = j.at("N").get<int>();
  const double p = j.at("p").get<double>();
  if (n > kExactDimensionCap) {
    throw capacity_error("table files are capped at N = " +
                         std::to_string(kExactDimensionCap));
  }
  const CubeConfig cube = CubeConfig::create(n, p);
  const std::vector<double> values =
      j.at("values").get<std::vector<double>>();
  double bound = 0.0;
  for (double v : values) bound = std::max(bound, std::abs(v));
  if (bound == 0.0) bound = 1.0;
  bound = j.value("bound", bound);
  return {cube, FunctionOracle::from_table(n, bound, values)};
}

// pattern,value[,weight] rows; '#' comments and blank lines skipped; the
// weight column is all-or-nothing.
struct SampleFile {
  std::vector<Sample> samples;
  std::vector<double> weights;  // empty when the file has no weight column
  int dimension = 0;
};

SampleFile read_samples_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  SampleFile file;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    const std::string where =
        path + ":" + std::to_string(line_no);
    if (fields.size() != 2 && fields.size() != 3) {
      throw std::invalid_argument(where +
                                  ": expected pattern,value[,weight]");
    }
    const Point x = Point::from_pattern(fields[0]);
    if (file.samples.empty()) {
      file.dimension = x.dimension();
    } else if (x.dimension() != file.dimension) {
      throw std::invalid_argument(where + ": inconsistent pattern length");
    }
    const bool has_weight = fields.size() == 3;
    const bool expect_weight =
        file.samples.empty() ? has_weight : !file.weights.empty();
    if (has_weight != expect_weight) {
      throw std::invalid_argument(where +
                                  ": weight column must be all-or-nothing");
    }
    file.samples.push_back(
        {x, parse_strict_double(fields[1], where.c_str())});
    if (has_weight) {
      file.weights.push_back(parse_strict_double(fields[2], where.c_str()));
    }
  }
  if (file.samples.empty()) {
    throw std::invalid_argument(path + ": no samples");
  }
  return file;
}

// Accepts a bare spectrum document or any artifact that embeds one under a
// top-level "spectrum" key (such as a transform output).
Spectrum read_spectrum_file(const std::string& path) {
  json j = read_json_file(path);
  if (j.is_object() && j.contains("spectrum")) j = j.at("spectrum");
  return spectrum_from_json(j);
}

Subset one_based_subset(const std::vector<int>& indices, const char* where) {
  std::vector<int> zero;
  zero.reserve(indices.size());
  for (int i : indices) {
    if (i < 1) {
      throw std::invalid_argument(std::string(where) +
                                  ": indices are 1-based");
    }
    zero.push_back(i - 1);
  }
  return Subset::from_indices(zero);
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each takes the fully resolved config.

void run_transform(const json& cfg) {
  const std::string table_path = cfg.at("table").get<std::string>();
  if (table_path.empty()) {
    throw std::invalid_argument("transform: --table is required");
  }
  const TableFile in = read_table_json(table_path);
  const Spectrum s = exact_transform(in.oracle, in.cube);
  const LevelWeights lw = level_weights(s);
  const LinearityReport lin = linearity_test(s);

  json out;
  out["meta"] = make_meta("transform", 0, 1, cfg);
  out["spectrum"] = spectrum_to_json(s);
  out["level_weights"] = {{"mass", lw.mass}, {"total", lw.total}};
  out["linearity"] = {{"linear", lin.linear},
                      {"witness_level", lin.witness_level},
                      {"witness_mass", lin.witness_mass}};
  write_output(cfg.at("out").get<std::string>(), out.dump(2) + "\n");

  const std::string csv_path = cfg.at("csv").get<std::string>();
  if (!csv_path.empty()) {
    std::ostringstream csv;
    csv << csv_meta("transform", 0, 1, cfg);
    csv << "level,mass,tail\n";
    for (std::size_t k = 0; k < lw.mass.size(); ++k) {
      csv << k << ',' << fmt17(lw.mass[k]) << ','
          << fmt17(lw.tail(static_cast<int>(k))) << '\n';
    }
    write_output(csv_path, csv.str());
  }
}

void run_fit(const json& cfg) {
  const std::string spectrum_path = cfg.at("spectrum").get<std::string>();
  const std::string samples_path = cfg.at("samples").get<std::string>();
  if (spectrum_path.empty() == samples_path.empty()) {
    throw std::invalid_argument(
        "fit: exactly one of --spectrum and --samples is required");
  }
  const std::string kind = cfg.at("penalty").get<std::string>();
  const double lambda = cfg.at("lambda").get<double>();
  Regularizer reg;
  if (kind == "none") {
    reg = Regularizer::none();
    if (lambda != 0.0) {
      throw std::invalid_argument("fit: lambda needs --l1 or --l2");
    }
  } else if (kind == "l1") {
    reg = Regularizer::l1(lambda);
  } else if (kind == "l2") {
    reg = Regularizer::l2(lambda);
  } else {
    throw std::invalid_argument("fit: penalty must be none, l1, or l2");
  }

  json out;
  out["meta"] = make_meta("fit", 0, 1, cfg);
  Datamodel model;
  if (!spectrum_path.empty()) {
    const Spectrum s = read_spectrum_file(spectrum_path);
    model = fit_closed_form(s, reg);
    out["fit_report"] = {
        {"sweeps", 0}, {"converged", true}, {"stop", "closed-form"}};
    out["population_residual"] = population_residual(model, s);
  } else {
    const SampleFile file = read_samples_csv(samples_path);
    FitOptions fopt;
    fopt.weights = file.weights;
    fopt.cd_tol = cfg.at("cd_tol").get<double>();
    fopt.cd_max_sweeps = cfg.at("cd_max_sweeps").get<int>();
    const FitResult r =
        fit_empirical(file.samples, cfg.at("p").get<double>(), reg, fopt);
    model = r.model;
    out["fit_report"] = {{"sweeps", r.report.sweeps},
                         {"converged", r.report.converged},
                         {"stop", r.report.stop}};
  }
  out["datamodel"] = datamodel_to_json(model);
  write_output(cfg.at("out").get<std::string>(), out.dump(2) + "\n");

  const std::string csv_path = cfg.at("csv").get<std::string>();
  if (!csv_path.empty()) {
    std::vector<std::size_t> order(model.weights.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       const double wa = std::abs(model.weights[a]);
                       const double wb = std::abs(model.weights[b]);
                       if (wa != wb) return wa > wb;
                       return a < b;
                     });
    std::ostringstream csv;
    csv << csv_meta("fit", 0, 1, cfg);
    csv << "index,weight\n";
    for (std::size_t i : order) {
      csv << (i + 1) << ',' << fmt17(model.weights[i]) << '\n';
    }
    write_output(csv_path, csv.str());
  }
}

void run_influence(const json& cfg) {
  const std::string spectrum_path = cfg.at("spectrum").get<std::string>();
  if (spectrum_path.empty()) {
    throw std::invalid_argument("influence: --spectrum is required");
  }
  const Spectrum s = read_spectrum_file(spectrum_path);
  std::vector<int> indices = cfg.at("set").get<std::vector<int>>();
  if (indices.empty()) {
    indices.resize(static_cast<std::size_t>(s.dimension()));
    for (int i = 0; i < s.dimension(); ++i) {
      indices[static_cast<std::size_t>(i)] = i + 1;
    }
  }
  std::ostringstream csv;
  csv << csv_meta("influence", 0, 1, cfg);
  csv << "index,influence,deletion,insertion\n";
  for (int idx : indices) {
    if (idx < 1 || idx > s.dimension()) {
      throw std::invalid_argument("influence: index out of range: " +
                                  std::to_string(idx));
    }
    const int i = idx - 1;
    csv << idx << ',' << fmt17(average_influence(s, i)) << ','
        << fmt17(deletion_influence(s, i)) << ','
        << fmt17(insertion_influence(s, i)) << '\n';
  }
  write_output(cfg.at("out").get<std::string>(), csv.str());
}

void run_group(const json& cfg) {
  const std::string spectrum_path = cfg.at("spectrum").get<std::string>();
  if (spectrum_path.empty()) {
    throw std::invalid_argument("group: --spectrum is required");
  }
  const std::vector<int> indices = cfg.at("set").get<std::vector<int>>();
  if (indices.empty()) {
    throw std::invalid_argument("group: --set is required");
  }
  const Spectrum s = read_spectrum_file(spectrum_path);
  const Subset set = one_based_subset(indices, "group");
  if (set.indices().back() >= s.dimension()) {
    throw std::invalid_argument("group: index past dimension");
  }
  const GroupInfluenceReport rep = group_influence_fourier(s, set);

  json out;
  out["meta"] = make_meta("group", 0, 1, cfg);
  out["N"] = s.dimension();
  out["p"] = s.p();
  json set_json = json::array();
  for (int i : set.indices()) set_json.push_back(i + 1);
  out["set"] = std::move(set_json);
  out["exact"] = rep.exact;
  out["linear_part"] = rep.linear_part;
  out["fourier_residual"] = rep.fourier_residual;
  out["residual_bound"] = rep.bound;
  write_output(cfg.at("out").get<std::string>(), out.dump(2) + "\n");
}

McOptions mc_options(const json& cfg) {
  McOptions opt;
  opt.seed = cfg.at("seed").get<std::uint64_t>();
  opt.sequence = cfg.at("sequence").get<std::uint64_t>();
  opt.partitions = cfg.at("partitions").get<int>();
  opt.eta = cfg.at("eta").get<double>();
  opt.fused_rho1 = cfg.at("fused").get<bool>();
  return opt;
}

SyntheticInstance load_function(const json& cfg, json* spec_echo) {
  const std::string path = cfg.at("function").get<std::string>();
  if (path.empty()) {
    throw std::invalid_argument("--function (a synthetic spec file) is "
                                "required");
  }
  const SyntheticSpec spec = synthetic_spec_from_json(read_json_file(path));
  *spec_echo = synthetic_spec_to_json(spec);
  return generate(spec);
}

std::string record_csv_rows(const std::vector<StabilityRecord>& records) {
  std::ostringstream rows;
  rows << "rho,estimate,halfwidth,pairs,eta\n";
  for (const StabilityRecord& r : records) {
    rows << fmt17(r.rho) << ',' << fmt17(r.estimate) << ','
         << fmt17(r.halfwidth) << ',' << r.pairs << ',' << fmt17(r.eta)
         << '\n';
  }
  return rows.str();
}

void run_stability(const json& cfg) {
  json spec_echo;
  const SyntheticInstance inst = load_function(cfg, &spec_echo);
  const std::vector<double> rhos = cfg.at("rhos").get<std::vector<double>>();
  if (rhos.empty()) {
    throw std::invalid_argument("stability: --rhos must be nonempty");
  }
  const std::int64_t budget = cfg.at("budget").get<std::int64_t>();
  std::int64_t share = budget / static_cast<std::int64_t>(rhos.size());
  share -= share % 2;
  if (share < 2) {
    throw std::invalid_argument(
        "stability: budget below 2 evaluations per rho");
  }
  const std::int64_t discarded =
      budget - share * static_cast<std::int64_t>(rhos.size());

  McOptions opt = mc_options(cfg);
  const std::uint64_t base_sequence = opt.sequence;
  std::vector<StabilityRecord> records;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    opt.sequence = (base_sequence << 8) | static_cast<std::uint64_t>(i);
    records.push_back(
        noise_stability_mc(inst.oracle, share, rhos[i], inst.cube, opt));
  }

  std::ostringstream csv;
  csv << csv_meta("stability", opt.seed, opt.partitions, cfg,
                  {"function_spec: " + spec_echo.dump(),
                   "evals_per_rho: " + std::to_string(share),
                   "discarded_budget: " + std::to_string(discarded)});
  csv << record_csv_rows(records);
  write_output(cfg.at("out").get<std::string>(), csv.str());
}

void run_residual(const json& cfg) {
  json spec_echo;
  const SyntheticInstance inst = load_function(cfg, &spec_echo);
  PolyFitConfig fit;
  fit.rhos = cfg.at("rhos").get<std::vector<double>>();
  fit.degree = cfg.at("degree").get<int>();
  const McOptions opt = mc_options(cfg);
  const ResidualEstimate est = residual_estimation(
      inst.oracle, cfg.at("budget").get<std::int64_t>(), fit, inst.cube, opt);

  json out;
  out["meta"] = make_meta("residual", est.seed, est.partitions, cfg);
  out["function_spec"] = spec_echo;
  out["total"] = est.total;
  out["b0"] = est.b0;
  out["b1"] = est.b1;
  out["tail2"] = est.tail2;
  out["tail2_halfwidth"] = est.tail2_halfwidth;
  json records = json::array();
  for (const StabilityRecord& r : est.records) {
    records.push_back({{"rho", r.rho},
                       {"estimate", r.estimate},
                       {"pairs", r.pairs},
                       {"halfwidth", r.halfwidth},
                       {"eta", r.eta}});
  }
  out["records"] = std::move(records);
  out["fit"] = {{"rhos", est.fit.rhos}, {"degree", est.fit.degree}};
  out["seed"] = est.seed;
  out["partitions"] = est.partitions;
  out["budget"] = est.budget;
  out["evals_used"] = est.evals_used;
  out["discarded_budget"] = est.discarded_budget;
  write_output(cfg.at("out").get<std::string>(), out.dump(2) + "\n");

  const std::string csv_path = cfg.at("csv").get<std::string>();
  if (!csv_path.empty()) {
    std::ostringstream csv;
    csv << csv_meta("residual", est.seed, est.partitions, cfg,
                    {"function_spec: " + spec_echo.dump()});
    csv << record_csv_rows(est.records);
    write_output(csv_path, csv.str());
  }
}

void run_threshold(const json& cfg) {
  const std::vector<int> sizes = cfg.at("sizes").get<std::vector<int>>();
  if (sizes.empty()) {
    throw std::invalid_argument("threshold: --sizes must be nonempty");
  }
  const double p = cfg.at("p").get<double>();
  const double beta = cfg.at("beta").get<double>();
  const int kmax = cfg.at("kmax").get<int>();
  if (kmax < 1) {
    throw std::invalid_argument("threshold: kmax must be >= 1");
  }

  std::ostringstream csv;
  csv << csv_meta("threshold", 0, 1, cfg);
  csv << "M,k,group_influence,k_single_influence,ratio,lower_bound\n";
  for (int m : sizes) {
    std::vector<int> all(static_cast<std::size_t>(std::max(m, 0)));
    for (int i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
    const ThresholdModel model = ThresholdModel::create(
        m, Subset::from_indices(all), beta,
        std::numeric_limits<double>::infinity(), p);
    const double single = threshold_group_influence(model, 1);
    for (int k = 1; k <= std::min(kmax, m); ++k) {
      const double gi = threshold_group_influence(model, k);
      const double floor_value =
          p > 0.5 ? blowup_lower_bound(p, k)
                  : std::numeric_limits<double>::quiet_NaN();
      csv << m << ',' << k << ',' << fmt17(gi) << ','
          << fmt17(static_cast<double>(k) * single) << ','
          << fmt17(blowup_ratio(model, k)) << ',' << fmt17(floor_value)
          << '\n';
    }
  }
  write_output(cfg.at("out").get<std::string>(), csv.str());
}

// ---------------------------------------------------------------------------

json describe_document() {
  json d;
  d["tool"] = kTool;
  d["version"] = kVersion;
  d["meta"] =
      "every JSON output carries meta = {tool, version, command, seed, "
      "partitions, config: <resolved parameters>}; every CSV output starts "
      "with '# ' comment lines carrying the same fields, then a header row; "
      "CSV numbers use 17 significant digits with '.' decimals; coordinates "
      "are 1-based";
  d["commands"]["transform"] = {
      {"out",
       "json {meta, spectrum: {N, p, coeffs: [{S: [1-based indices], v: "
       "number}]},"
       " level_weights: {mass: [number], total: number}, linearity: {linear: "
       "bool, witness_level: int, witness_mass: number}}"},
      {"csv", "level,mass,tail"}};
  d["commands"]["fit"] = {
      {"out",
       "json {meta, datamodel: {p, intercept, weights: [number], "
       "regularizer: {kind, lambda}}, fit_report: {sweeps, converged, stop}, "
       "population_residual (spectrum input only)}"},
      {"csv", "index,weight  (sorted by |weight| descending, then index)"}};
  d["commands"]["influence"] = {{"out", "csv index,influence,deletion,insertion"}};
  d["commands"]["group"] = {
      {"out",
       "json {meta, N, p, set: [1-based indices], exact, linear_part, "
       "fourier_residual, residual_bound}"}};
  d["commands"]["stability"] = {{"out", "csv rho,estimate,halfwidth,pairs,eta"}};
  d["commands"]["residual"] = {
      {"out",
       "json {meta, function_spec, total, b0, b1, tail2, tail2_halfwidth, "
       "records: [{rho, estimate, pairs, halfwidth, eta}], fit: {rhos, "
       "degree}, seed, partitions, budget, evals_used, discarded_budget}"},
      {"csv", "rho,estimate,halfwidth,pairs,eta"}};
  d["commands"]["threshold"] = {
      {"out", "csv M,k,group_influence,k_single_influence,ratio,lower_bound"}};
  d["inputs"]["table"] =
      "json {N: int <= 24, p: (0,1), values: [2^N numbers; mask bit b set "
      "means coordinate b+1 is +1], bound: optional number}";
  d["inputs"]["spectrum"] =
      "json {N: int, p: (0,1), coeffs: [{S: [1-based indices], v: number}]}; "
      "a document embedding one under a top-level 'spectrum' key (a "
      "transform artifact) is also accepted";
  d["inputs"]["samples"] =
      "csv pattern,value[,weight]; pattern over '+'/'-', position i is "
      "coordinate i+1; '#' comments allowed; weight column all-or-nothing";
  d["inputs"]["function"] =
      "json synthetic spec {family: random_spectrum | planted_linear | "
      "threshold | custom_table, seed, family-specific fields; threshold "
      "alpha may be the string \"inf\"}";
  return d;
}

void emit_error(int code, const char* type, const std::string& message) {
  json record;
  record["error"] = {{"code", code}, {"type", type}, {"message", message}};
  std::cerr << record.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harmonic analysis toolkit for the p-biased Boolean cube"};
  app.set_version_flag("--version", std::string(kTool) + " " + kVersion);
  bool describe = false;
  app.add_flag("--describe", describe,
               "print the JSON schema of every output and input format");
  app.require_subcommand(0, 1);

  struct CommandState {
    CLI::App* cmd = nullptr;
    OptBinder binder;
    std::string config_path;
    std::function<void(const json&)> run;
  };
  std::vector<CommandState> commands(7);

  auto add_common = [](CommandState& state, CLI::App* cmd,
                       std::string* out_path) {
    state.cmd = cmd;
    cmd->add_option("--config", state.config_path,
                    "JSON parameter file; explicit flags override it");
    state.binder.bind(
        cmd->add_option("--out", *out_path, "output path, '-' for stdout"),
        "out", out_path);
  };

  // transform ---------------------------------------------------------------
  static struct {
    std::string table, out = "-", csv;
  } tr;
  {
    CommandState& state = commands[0];
    CLI::App* cmd = app.add_subcommand(
        "transform", "value table -> spectrum JSON and level-weight CSV");
    add_common(state, cmd, &tr.out);
    state.binder.bind(cmd->add_option("--table", tr.table, "table JSON file"),
                      "table", &tr.table);
    state.binder.bind(
        cmd->add_option("--csv", tr.csv, "level-weight CSV path (optional)"),
        "csv", &tr.csv);
    state.run = run_transform;
  }

  // fit ---------------------------------------------------------------------
  static struct {
    std::string spectrum, samples, penalty = "none", out = "-", csv;
    double lambda = 0.0, p = 0.5, cd_tol = 1e-10;
    int cd_max_sweeps = 10000;
  } ft;
  {
    CommandState& state = commands[1];
    CLI::App* cmd = app.add_subcommand(
        "fit", "spectrum or samples -> datamodel JSON and weight CSV");
    add_common(state, cmd, &ft.out);
    state.binder.bind(
        cmd->add_option("--spectrum", ft.spectrum, "spectrum JSON file"),
        "spectrum", &ft.spectrum);
    state.binder.bind(
        cmd->add_option("--samples", ft.samples, "samples CSV file"),
        "samples", &ft.samples);
    CLI::Option* l1 = cmd->add_option(
        "--l1", ft.lambda, "lasso penalty strength (sets penalty = l1)");
    CLI::Option* l2 = cmd->add_option(
        "--l2", ft.lambda, "ridge penalty strength (sets penalty = l2)");
    l1->excludes(l2);
    // The JSON-facing keys are penalty/lambda; --l1 and --l2 are shorthands
    // patched into the resolved config after the merge.
    state.binder.declare("penalty", ft.penalty);
    state.binder.declare("lambda", ft.lambda);
    state.binder.bind(cmd->add_option("--p", ft.p,
                                      "cube bias (samples input only)"),
                      "p", &ft.p);
    state.binder.bind(
        cmd->add_option("--cd-tol", ft.cd_tol, "lasso stopping tolerance"),
        "cd_tol", &ft.cd_tol);
    state.binder.bind(cmd->add_option("--cd-max-sweeps", ft.cd_max_sweeps,
                                      "lasso sweep cap"),
                      "cd_max_sweeps", &ft.cd_max_sweeps);
    state.binder.bind(
        cmd->add_option("--csv", ft.csv, "sorted weight CSV path (optional)"),
        "csv", &ft.csv);
    state.run = [l1, l2](const json& cfg) {
      json patched = cfg;
      if (l1->count() > 0) {
        patched["penalty"] = "l1";
        patched["lambda"] = ft.lambda;
      } else if (l2->count() > 0) {
        patched["penalty"] = "l2";
        patched["lambda"] = ft.lambda;
      }
      run_fit(patched);
    };
  }

  // influence -----------------------------------------------------------------
  static struct {
    std::string spectrum, out = "-";
    std::vector<int> set;
  } infl;
  {
    CommandState& state = commands[2];
    CLI::App* cmd = app.add_subcommand(
        "influence", "spectrum + index set -> per-coordinate influence CSV");
    add_common(state, cmd, &infl.out);
    state.binder.bind(
        cmd->add_option("--spectrum", infl.spectrum, "spectrum JSON file"),
        "spectrum", &infl.spectrum);
    state.binder.bind(cmd->add_option("--set", infl.set,
                                      "1-based coordinate list (default all)")
                          ->delimiter(','),
                      "set", &infl.set);
    state.run = run_influence;
  }

  // group ---------------------------------------------------------------------
  static struct {
    std::string spectrum, out = "-";
    std::vector<int> set;
  } grp;
  {
    CommandState& state = commands[3];
    CLI::App* cmd = app.add_subcommand(
        "group", "spectrum + set -> group influence report JSON");
    add_common(state, cmd, &grp.out);
    state.binder.bind(
        cmd->add_option("--spectrum", grp.spectrum, "spectrum JSON file"),
        "spectrum", &grp.spectrum);
    state.binder.bind(cmd->add_option("--set", grp.set,
                                      "1-based coordinate list")
                          ->delimiter(','),
                      "set", &grp.set);
    state.run = run_group;
  }

  auto bind_mc = [](CommandState& state, CLI::App* cmd, std::uint64_t* seed,
                    std::uint64_t* sequence, int* partitions, double* eta,
                    bool* fused) {
    state.binder.bind(cmd->add_option("--seed", *seed, "RNG seed"), "seed",
                      seed);
    state.binder.bind(
        cmd->add_option("--sequence", *sequence, "estimate stream id"),
        "sequence", sequence);
    state.binder.bind(cmd->add_option("--partitions", *partitions,
                                      "work partitions (never changes "
                                      "values)"),
                      "partitions", partitions);
    state.binder.bind(
        cmd->add_option("--eta", *eta, "half-width confidence parameter"),
        "eta", eta);
    state.binder.bind(cmd->add_flag("--fused", *fused,
                                    "evaluate once per pair when rho = 1"),
                      "fused", fused);
  };

  // stability -----------------------------------------------------------------
  static struct {
    std::string function, out = "-";
    std::vector<double> rhos{0.0, 0.1, 0.2, 1.0};
    std::int64_t budget = 100000;
    std::uint64_t seed = 0, sequence = 0;
    int partitions = 1;
    double eta = 0.05;
    bool fused = false;
  } stb;
  {
    CommandState& state = commands[4];
    CLI::App* cmd = app.add_subcommand(
        "stability",
        "synthetic function + rho list + budget -> stability CSV");
    add_common(state, cmd, &stb.out);
    state.binder.bind(cmd->add_option("--function", stb.function,
                                      "synthetic spec JSON file"),
                      "function", &stb.function);
    state.binder.bind(
        cmd->add_option("--rhos", stb.rhos, "correlation levels")
            ->delimiter(','),
        "rhos", &stb.rhos);
    state.binder.bind(cmd->add_option("--budget", stb.budget,
                                      "total oracle evaluations"),
                      "budget", &stb.budget);
    bind_mc(state, cmd, &stb.seed, &stb.sequence, &stb.partitions, &stb.eta,
            &stb.fused);
    state.run = run_stability;
  }

  // residual ------------------------------------------------------------------
  static struct {
    std::string function, out = "-", csv;
    std::vector<double> rhos{0.0, 0.1, 0.2, 1.0};
    int degree = 2;
    std::int64_t budget = 100000;
    std::uint64_t seed = 0, sequence = 0;
    int partitions = 1;
    double eta = 0.05;
    bool fused = false;
  } rsd;
  {
    CommandState& state = commands[5];
    CLI::App* cmd = app.add_subcommand(
        "residual",
        "synthetic function + fit grid + budget -> residual estimate JSON");
    add_common(state, cmd, &rsd.out);
    state.binder.bind(cmd->add_option("--function", rsd.function,
                                      "synthetic spec JSON file"),
                      "function", &rsd.function);
    state.binder.bind(
        cmd->add_option("--rhos", rsd.rhos, "fit correlation levels")
            ->delimiter(','),
        "rhos", &rsd.rhos);
    state.binder.bind(
        cmd->add_option("--degree", rsd.degree, "fit polynomial degree"),
        "degree", &rsd.degree);
    state.binder.bind(cmd->add_option("--budget", rsd.budget,
                                      "total oracle evaluations"),
                      "budget", &rsd.budget);
    bind_mc(state, cmd, &rsd.seed, &rsd.sequence, &rsd.partitions, &rsd.eta,
            &rsd.fused);
    state.binder.bind(
        cmd->add_option("--csv", rsd.csv, "record CSV path (optional)"),
        "csv", &rsd.csv);
    state.run = run_residual;
  }

  // threshold -------------------------------------------------------------
  static struct {
    std::string out = "-";
    std::vector<int> sizes{40};
    double p = 0.75, beta = 0.5;
    int kmax = 6;
  } thr;
  {
    CommandState& state = commands[6];
    CLI::App* cmd = app.add_subcommand(
        "threshold", "hard threshold model grid -> blow-up ratio CSV");
    add_common(state, cmd, &thr.out);
    state.binder.bind(
        cmd->add_option("--sizes", thr.sizes, "group sizes M")
            ->delimiter(','),
        "sizes", &thr.sizes);
    state.binder.bind(cmd->add_option("--p", thr.p, "cube bias"), "p",
                      &thr.p);
    state.binder.bind(
        cmd->add_option("--beta", thr.beta, "threshold fraction"), "beta",
        &thr.beta);
    state.binder.bind(
        cmd->add_option("--kmax", thr.kmax, "largest deleted-group size"),
        "kmax", &thr.kmax);
    state.run = run_threshold;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error(1, "usage", e.what());
    return 1;
  }

  try {
    if (describe) {
      std::cout << describe_document().dump(2) << "\n";
      return 0;
    }
    for (CommandState& state : commands) {
      if (state.cmd != nullptr && state.cmd->parsed()) {
        state.run(state.binder.resolve(state.config_path));
        return 0;
      }
    }
    emit_error(1, "usage", "a subcommand is required; see --help");
    return 1;
  } catch (const capacity_error& e) {
    emit_error(2, "capacity", e.what());
    return 2;
  } catch (const json::exception& e) {
    emit_error(1, "validation", e.what());
    return 1;
  } catch (const std::logic_error& e) {
    emit_error(1, "validation", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error(2, "runtime", e.what());
    return 2;
  }
}
