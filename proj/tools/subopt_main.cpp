// Command-line surface for the subsampled-optimization library: data
// generation, full/subsample fits, sampling plans, uncertainty reports and
// the Monte Carlo experiment runner. Every run that produces files writes a
// run manifest before any result, and all randomness is keyed by explicit
// seeds so reruns are byte-identical.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "subopt/subopt.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitSingular = 4;
constexpr int kExitNoConvergence = 5;

constexpr std::uint64_t kCliStream = 0xC11;

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) s += ' ';
    s += argv[i];
  }
  return s;
}

/// key=value manifest, written before results so a crashed run still leaves
/// its provenance behind.
void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& fields,
                    const std::vector<std::string>& outputs) {
  std::ofstream out(path);
  if (!out) throw subopt::IoError("cannot write manifest " + path);
  out << "command=" << command << '\n';
  out << "version=" << subopt::kVersion << '\n';
  out << "wall_clock_start=" << now_utc() << '\n';
  for (const auto& [k, v] : fields) out << k << '=' << v << '\n';
  for (const auto& o : outputs) out << "output=" << o << '\n';
  if (!out) throw subopt::IoError("manifest write failed: " + path);
}

subopt::GeneratorKind parse_model(const std::string& name) {
  if (name == "linear") return subopt::GeneratorKind::LinearAR;
  if (name == "logistic") return subopt::GeneratorKind::LogisticDiag;
  throw CLI::ValidationError("--model", "expected linear or logistic");
}

subopt::LossModel loss_for(const std::string& model_name, subopt::Index dim) {
  return model_name == "linear" ? subopt::LossModel::squared_error(dim)
                                : subopt::LossModel::logistic(dim);
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "malformed number '" + item + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError(what, "empty list");
  return out;
}

struct SamplerChoice {
  enum class Kind { Unif, Lev, Grad, Hessian } kind = Kind::Unif;

  static SamplerChoice parse(const std::string& name) {
    if (name == "unif") return {Kind::Unif};
    if (name == "lev") return {Kind::Lev};
    if (name == "grad") return {Kind::Grad};
    if (name == "hessian") return {Kind::Hessian};
    throw CLI::ValidationError("--sampler", "expected unif|lev|grad|hessian");
  }
};

struct BuiltPlan {
  subopt::SamplingPlan plan;
  std::optional<subopt::Pilot> pilot;
};

BuiltPlan build_plan(const subopt::LossModel& model, const subopt::Dataset& data,
                     SamplerChoice sampler, double floor_beta,
                     subopt::Index pilot_size, subopt::Rng& rng,
                     bool uniform_fallback) {
  using Kind = SamplerChoice::Kind;
  switch (sampler.kind) {
    case Kind::Unif:
      return {subopt::uniform_plan(data.rows()), std::nullopt};
    case Kind::Lev:
      return {subopt::leverage_plan(data, floor_beta), std::nullopt};
    case Kind::Grad:
    case Kind::Hessian: {
      subopt::Pilot pilot = subopt::fit_pilot(model, data, pilot_size, rng);
      subopt::SamplingPlan plan =
          sampler.kind == Kind::Grad
              ? subopt::gradient_plan(model, data, pilot, floor_beta, uniform_fallback)
              : subopt::hessian_plan(model, data, pilot, floor_beta, uniform_fallback);
      return {std::move(plan), std::move(pilot)};
    }
  }
  throw subopt::Error("unreachable sampler kind");
}

/// Ordered key/value sink that renders as CSV lines or a single JSON object.
class Emitter {
 public:
  explicit Emitter(bool as_json) : as_json_(as_json) {}

  void add(const std::string& key, const std::string& v) { rows_.emplace_back(key, v); }
  void add(const std::string& key, double v) {
    rows_.emplace_back(key, subopt::detail::format_double(v));
  }
  void add(const std::string& key, subopt::Index v) {
    rows_.emplace_back(key, std::to_string(v));
  }
  void add(const std::string& key, bool v) {
    rows_.emplace_back(key, v ? "1" : "0");
  }

  void add_vector(const std::string& prefix, const Eigen::VectorXd& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      add(prefix + "_" + std::to_string(j), v(j));
    }
  }

  void add_matrix(const std::string& prefix, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        add(prefix + "_" + std::to_string(i) + "_" + std::to_string(j), m(i, j));
      }
    }
  }

  void flush(std::ostream& out) const {
    if (as_json_) {
      json obj = json::object();
      for (const auto& [k, v] : rows_) obj[k] = v;
      out << obj.dump() << '\n';
      return;
    }
    for (const auto& [k, v] : rows_) out << k << ',' << v << '\n';
  }

 private:
  bool as_json_;
  std::vector<std::pair<std::string, std::string>> rows_;
};

struct OutputTarget {
  std::ofstream file;
  bool to_file = false;

  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw subopt::IoError("cannot write " + path);
      to_file = true;
    }
  }

  std::ostream& stream() { return to_file ? static_cast<std::ostream&>(file) : std::cout; }
};

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string model;
  subopt::Index n = 100000;
  double delta = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string truth;
  std::string manifest;
};

int run_generate(const GenerateArgs& args, const std::string& command) {
  subopt::GeneratorSpec spec;
  spec.kind = parse_model(args.model);
  spec.n_rows = args.n;
  spec.delta = args.delta;
  spec.seed = args.seed;
  spec.validate();

  const std::string truth_path = args.truth.empty() ? args.out + ".truth.csv" : args.truth;
  const std::string manifest_path =
      args.manifest.empty() ? args.out + ".manifest" : args.manifest;

  write_manifest(manifest_path, command,
                 {{"subcommand", "generate"},
                  {"model", args.model},
                  {"n", std::to_string(args.n)},
                  {"delta", subopt::detail::format_double(args.delta)},
                  {"seed", std::to_string(args.seed)}},
                 {args.out, truth_path});

  const subopt::Dataset data = subopt::generate_dataset(spec);
  data.save_csv(args.out);

  std::ofstream truth(truth_path);
  if (!truth) throw subopt::IoError("cannot write " + truth_path);
  truth << "model," << args.model << '\n';
  truth << "n," << args.n << '\n';
  truth << "delta," << subopt::detail::format_double(args.delta) << '\n';
  truth << "seed," << args.seed << '\n';
  const subopt::Theta t = subopt::generator_true_theta(spec);
  for (Eigen::Index j = 0; j < t.size(); ++j) {
    truth << "theta_true_" << j << ',' << subopt::detail::format_double(t(j)) << '\n';
  }
  if (!truth) throw subopt::IoError("write failed for " + truth_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
  std::string model;
  std::string input;
  std::string mode = "full";
  std::string sampler = "unif";
  double fraction = 0.0;
  subopt::Index nsub = 0;
  double floor_beta = 0.05;
  subopt::Index pilot_size = 0;
  std::uint64_t seed = 1;
  double ci_level = 0.0;
  std::string candidate;
  std::string format = "csv";
  std::string out;
  std::string manifest;
};

Eigen::VectorXd parse_candidate(const std::string& text, subopt::Index dim) {
  const std::vector<double> vals = parse_double_list(text, "--candidate");
  if (static_cast<subopt::Index>(vals.size()) != dim) {
    throw CLI::ValidationError("--candidate", "expected " + std::to_string(dim) +
                                                  " comma-separated values");
  }
  Eigen::VectorXd v(dim);
  for (subopt::Index j = 0; j < dim; ++j) v(j) = vals[static_cast<std::size_t>(j)];
  return v;
}

int run_fit(const FitArgs& args, const std::string& command) {
  if (args.mode != "full" && args.mode != "weighted" && args.mode != "equal") {
    throw CLI::ValidationError("--mode", "expected full|weighted|equal");
  }
  if (args.ci_level != 0.0 && args.mode != "weighted") {
    throw CLI::ValidationError("--ci", "only available with --mode weighted");
  }
  if (!args.out.empty() || !args.manifest.empty()) {
    const std::string manifest_path =
        args.manifest.empty() ? args.out + ".manifest" : args.manifest;
    write_manifest(manifest_path, command,
                   {{"subcommand", "fit"},
                    {"model", args.model},
                    {"input", args.input},
                    {"mode", args.mode},
                    {"sampler", args.sampler},
                    {"seed", std::to_string(args.seed)}},
                   args.out.empty() ? std::vector<std::string>{}
                                    : std::vector<std::string>{args.out});
  }

  const subopt::Dataset data = subopt::Dataset::load_csv(args.input);
  const subopt::LossModel model = loss_for(args.model, data.cols());
  model.check_compatible(data);

  OutputTarget target(args.out);
  Emitter emit(args.format == "json");
  emit.add("mode", args.mode);

  if (args.mode == "full") {
    const subopt::Solution sol = subopt::solve_full(model, data);
    emit.add("n", data.rows());
    emit.add_vector("theta", sol.theta);
    emit.add("grad_norm", sol.grad_norm);
    emit.add("iterations", static_cast<subopt::Index>(sol.iterations));
    emit.add("converged", sol.converged);
    emit.flush(target.stream());
    return sol.converged ? kExitOk : kExitNoConvergence;
  }

  subopt::Index n = args.nsub;
  if (n == 0) {
    if (!(args.fraction > 0.0 && args.fraction <= 1.0)) {
      throw CLI::ValidationError("--fraction", "need --fraction in (0,1] or --nsub");
    }
    n = std::max<subopt::Index>(
        1, static_cast<subopt::Index>(std::llround(
               args.fraction * static_cast<double>(data.rows()))));
  }

  subopt::Rng rng = subopt::Rng::stream(args.seed, {kCliStream, 1});
  const subopt::Index pilot_size =
      args.pilot_size > 0 ? args.pilot_size
                          : subopt::default_pilot_size(n, model.dim());
  const BuiltPlan built = build_plan(model, data, SamplerChoice::parse(args.sampler),
                                     args.floor_beta, pilot_size, rng, false);
  const subopt::SampleDraw sample = subopt::draw(built.plan, n, rng);
  const subopt::Theta* init = built.pilot ? &built.pilot->theta0 : nullptr;
  const subopt::Solution sol =
      args.mode == "weighted"
          ? subopt::solve_subsample_weighted(model, data, sample, init)
          : subopt::solve_subsample_equal(model, data, sample, init);

  // The MSE estimator and the confidence region are only defined when the
  // subsample Hessian is invertible; surface the failure explicitly.
  const Eigen::MatrixXd sub_hess =
      args.mode == "weighted" ? subopt::weighted_hess(model, data, sample, sol.theta)
                              : subopt::equal_weight_hess(model, data, sample, sol.theta);
  if (!subopt::strict_spd_inverse(sub_hess)) {
    throw subopt::SingularHessian(
        "subsample Hessian is not invertible (rank-deficient draw); "
        "uncertainty for this draw is undefined");
  }

  emit.add("n", n);
  emit.add("sampler", args.sampler);
  emit.add_vector("theta", sol.theta);
  emit.add("grad_norm", sol.grad_norm);
  emit.add("iterations", static_cast<subopt::Index>(sol.iterations));
  emit.add("converged", sol.converged);

  if (args.ci_level != 0.0) {
    const subopt::ConfidenceSpec spec(args.ci_level, static_cast<int>(model.dim()));
    const subopt::SandwichEstimate est =
        subopt::mse_estimate(model, data, sample, sol.theta);
    Eigen::VectorXd candidate;
    if (!args.candidate.empty()) {
      candidate = parse_candidate(args.candidate, model.dim());
    } else {
      const subopt::Solution full = subopt::solve_full(model, data);
      candidate = full.theta;
    }
    const double stat = subopt::confidence_statistic(sol.theta, candidate, est);
    const double threshold = subopt::chi2_quantile(spec.dof, spec.level);
    emit.add("msehat_trace", est.trace());
    emit.add("ci_level", spec.level);
    emit.add("ci_statistic", stat);
    emit.add("chi2_threshold", threshold);
    emit.add("ci_inside", stat <= threshold);
  }

  emit.flush(target.stream());
  return sol.converged ? kExitOk : kExitNoConvergence;
}

// ---------------------------------------------------------------------------
// plan
// ---------------------------------------------------------------------------

struct PlanArgs {
  std::string model;
  std::string input;
  std::string sampler = "unif";
  double floor_beta = 0.05;
  subopt::Index pilot_size = 0;
  std::uint64_t seed = 1;
  bool fallback_uniform = false;
  std::string out;
  std::string manifest;
};

int run_plan(const PlanArgs& args, const std::string& command) {
  const std::string manifest_path =
      args.manifest.empty() ? args.out + ".manifest" : args.manifest;
  write_manifest(manifest_path, command,
                 {{"subcommand", "plan"},
                  {"model", args.model},
                  {"input", args.input},
                  {"sampler", args.sampler},
                  {"floor_beta", subopt::detail::format_double(args.floor_beta)},
                  {"seed", std::to_string(args.seed)}},
                 {args.out});

  const subopt::Dataset data = subopt::Dataset::load_csv(args.input);
  const subopt::LossModel model = loss_for(args.model, data.cols());
  model.check_compatible(data);

  subopt::Rng rng = subopt::Rng::stream(args.seed, {kCliStream, 2});
  const subopt::Index pilot_size =
      args.pilot_size > 0 ? args.pilot_size
                          : std::max<subopt::Index>(500, 20 * model.dim());
  const BuiltPlan built =
      build_plan(model, data, SamplerChoice::parse(args.sampler), args.floor_beta,
                 std::min(pilot_size, data.rows()), rng, args.fallback_uniform);
  built.plan.save_csv(args.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string model;
  std::string input;
  std::string sampler = "unif";
  double fraction = 0.01;
  subopt::Index nsub = 0;
  double floor_beta = 0.05;
  subopt::Index pilot_size = 0;
  std::uint64_t seed = 1;
  double level = 0.95;
  std::string kind = "msehat";
  std::string format = "csv";
  std::string out;
  std::string manifest;
};

int run_report(const ReportArgs& args, const std::string& command) {
  if (args.kind != "msehat" && args.kind != "amse") {
    throw CLI::ValidationError("--kind", "expected msehat or amse");
  }
  if (!args.out.empty() || !args.manifest.empty()) {
    const std::string manifest_path =
        args.manifest.empty() ? args.out + ".manifest" : args.manifest;
    write_manifest(manifest_path, command,
                   {{"subcommand", "report"},
                    {"model", args.model},
                    {"input", args.input},
                    {"sampler", args.sampler},
                    {"kind", args.kind},
                    {"seed", std::to_string(args.seed)}},
                   args.out.empty() ? std::vector<std::string>{}
                                    : std::vector<std::string>{args.out});
  }

  const subopt::Dataset data = subopt::Dataset::load_csv(args.input);
  const subopt::LossModel model = loss_for(args.model, data.cols());
  model.check_compatible(data);

  const subopt::Solution full = subopt::solve_full(model, data);
  if (!full.converged) return kExitNoConvergence;

  subopt::Index n = args.nsub;
  if (n == 0) {
    n = std::max<subopt::Index>(
        1, static_cast<subopt::Index>(std::llround(
               args.fraction * static_cast<double>(data.rows()))));
  }
  subopt::Rng rng = subopt::Rng::stream(args.seed, {kCliStream, 3});
  const subopt::Index pilot_size =
      args.pilot_size > 0 ? args.pilot_size
                          : subopt::default_pilot_size(n, model.dim());
  const BuiltPlan built = build_plan(model, data, SamplerChoice::parse(args.sampler),
                                     args.floor_beta, pilot_size, rng, false);
  const subopt::SampleDraw sample = subopt::draw(built.plan, n, rng);
  const subopt::Theta* init = built.pilot ? &built.pilot->theta0 : nullptr;
  const subopt::Solution sol =
      subopt::solve_subsample_weighted(model, data, sample, init);
  if (!sol.converged) return kExitNoConvergence;

  const subopt::SandwichEstimate est =
      args.kind == "msehat"
          ? subopt::mse_estimate(model, data, sample, sol.theta)
          : subopt::amse(model, data, built.plan, full.theta, n);
  const double stat = subopt::confidence_statistic(sol.theta, full.theta, est);
  const double threshold =
      subopt::chi2_quantile(static_cast<int>(model.dim()), args.level);

  OutputTarget target(args.out);
  Emitter emit(args.format == "json");
  emit.add("kind", args.kind);
  emit.add("n", n);
  emit.add_vector("theta_sub", sol.theta);
  emit.add_vector("theta_full", full.theta);
  emit.add_matrix("est", est.matrix);
  emit.add("trace", est.trace());
  emit.add("ci_level", args.level);
  emit.add("ci_statistic", stat);
  emit.add("chi2_threshold", threshold);
  emit.add("ci_inside", stat <= threshold);
  emit.flush(target.stream());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string preset;
  std::string config_file;
  std::string model;
  std::vector<double> deltas;
  subopt::Index n = 0;
  int reps = 0;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string fractions;
  std::string methods;
  std::string weightings;
  std::string levels;
  double floor_beta = -1.0;
  subopt::Index pilot_cap = 0;
  subopt::Index ref_pilot = 0;
  int threads = 0;
  std::string out_dir = ".";
  bool points = false;
};

std::vector<subopt::Method> parse_methods(const std::string& text) {
  std::vector<subopt::Method> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "unif") {
      out.push_back(subopt::Method::Unif);
    } else if (item == "lev") {
      out.push_back(subopt::Method::Lev);
    } else if (item == "grad") {
      out.push_back(subopt::Method::Grad);
    } else if (item == "hessian") {
      out.push_back(subopt::Method::Hessian);
    } else {
      throw CLI::ValidationError("--methods", "unknown method '" + item + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError("--methods", "empty list");
  return out;
}

std::vector<subopt::Weighting> parse_weightings(const std::string& text) {
  std::vector<subopt::Weighting> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "ipw") {
      out.push_back(subopt::Weighting::Ipw);
    } else if (item == "equal") {
      out.push_back(subopt::Weighting::Equal);
    } else {
      throw CLI::ValidationError("--weightings", "unknown weighting '" + item + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError("--weightings", "empty list");
  return out;
}

/// key=value config file; flags given on the command line win.
void apply_config_file(ExperimentArgs& args, const CLI::App* cmd) {
  std::ifstream in(args.config_file);
  if (!in) throw subopt::IoError("cannot open config " + args.config_file);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw subopt::IoError(args.config_file + ": expected key=value, got '" + line + "'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto absent = [&](const char* flag) { return cmd->count(flag) == 0; };
  const auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  if (absent("--preset")) {
    if (auto v = get("preset")) args.preset = *v;
  }
  if (absent("--model")) {
    if (auto v = get("model")) args.model = *v;
  }
  if (absent("--delta")) {
    if (auto v = get("delta")) args.deltas = parse_double_list(*v, "delta");
  }
  if (absent("--n")) {
    if (auto v = get("n")) args.n = std::stoll(*v);
  }
  if (absent("--reps")) {
    if (auto v = get("reps")) args.reps = std::stoi(*v);
  }
  if (absent("--seed")) {
    if (auto v = get("seed")) {
      args.seed = std::stoull(*v);
      args.seed_given = true;
    }
  }
  if (absent("--fractions")) {
    if (auto v = get("fractions")) args.fractions = *v;
  }
  if (absent("--methods")) {
    if (auto v = get("methods")) args.methods = *v;
  }
  if (absent("--weightings")) {
    if (auto v = get("weightings")) args.weightings = *v;
  }
  if (absent("--levels")) {
    if (auto v = get("levels")) args.levels = *v;
  }
  if (absent("--floor-beta")) {
    if (auto v = get("floor_beta")) args.floor_beta = std::stod(*v);
  }
  if (absent("--pilot-cap")) {
    if (auto v = get("pilot_cap")) args.pilot_cap = std::stoll(*v);
  }
  if (absent("--ref-pilot")) {
    if (auto v = get("ref_pilot")) args.ref_pilot = std::stoll(*v);
  }
  if (absent("--threads")) {
    if (auto v = get("threads")) args.threads = std::stoi(*v);
  }
  if (absent("--points")) {
    if (auto v = get("points")) args.points = (*v == "1" || *v == "true");
  }
}

std::vector<subopt::ExperimentConfig> assemble_configs(const ExperimentArgs& args) {
  std::vector<subopt::ExperimentConfig> configs;
  if (args.preset == "paper-linear") {
    configs.push_back(subopt::preset_paper_linear(args.seed));
  } else if (args.preset == "paper-logistic") {
    configs.push_back(subopt::preset_paper_logistic(args.seed));
  } else if (args.preset == "appendix-e") {
    configs = subopt::preset_appendix_e(args.seed);
  } else if (args.preset.empty()) {
    if (args.model.empty()) {
      throw CLI::ValidationError("--model", "required when no --preset is given");
    }
    subopt::ExperimentConfig cfg;
    cfg.generator.kind = parse_model(args.model);
    cfg.generator.seed = args.seed;
    cfg.master_seed = args.seed;
    cfg.methods = cfg.generator.kind == subopt::GeneratorKind::LinearAR
                      ? std::vector<subopt::Method>{subopt::Method::Unif,
                                                    subopt::Method::Lev,
                                                    subopt::Method::Grad,
                                                    subopt::Method::Hessian}
                      : std::vector<subopt::Method>{subopt::Method::Unif,
                                                    subopt::Method::Grad,
                                                    subopt::Method::Hessian};
    configs.push_back(std::move(cfg));
  } else {
    throw CLI::ValidationError("--preset",
                               "expected paper-linear|paper-logistic|appendix-e");
  }

  // delta overrides multiply the config list (one run per delta)
  if (!args.deltas.empty()) {
    std::vector<subopt::ExperimentConfig> expanded;
    for (double delta : args.deltas) {
      for (subopt::ExperimentConfig cfg : configs) {
        cfg.generator.delta = delta;
        expanded.push_back(std::move(cfg));
        if (args.preset == "appendix-e") break;  // keep one config per delta
      }
    }
    configs = std::move(expanded);
  }

  for (subopt::ExperimentConfig& cfg : configs) {
    if (args.n > 0) cfg.generator.n_rows = args.n;
    if (args.reps > 0) cfg.replications = args.reps;
    if (!args.fractions.empty()) {
      cfg.fractions = parse_double_list(args.fractions, "--fractions");
    }
    if (!args.methods.empty()) cfg.methods = parse_methods(args.methods);
    if (!args.weightings.empty()) cfg.weightings = parse_weightings(args.weightings);
    if (!args.levels.empty()) {
      cfg.confidence_levels = parse_double_list(args.levels, "--levels");
    }
    if (args.floor_beta >= 0.0) cfg.floor_beta = args.floor_beta;
    if (args.pilot_cap > 0) cfg.pilot_cap = args.pilot_cap;
    if (args.ref_pilot > 0) cfg.ref_pilot_size = args.ref_pilot;
    if (args.threads > 0) cfg.threads = args.threads;
    cfg.validate();
  }
  return configs;
}

int run_experiment_cmd(ExperimentArgs args, const CLI::App* cmd,
                       const std::string& command) {
  if (!args.config_file.empty()) apply_config_file(args, cmd);
  if (args.threads == 0) {
    if (const char* env = std::getenv("SUBOPT_THREADS")) {
      args.threads = std::max(1, std::atoi(env));
    }
  }
  const std::vector<subopt::ExperimentConfig> configs = assemble_configs(args);

  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) throw subopt::IoError("cannot create " + args.out_dir);
  const std::string report_path = (fs::path(args.out_dir) / "report.csv").string();
  const std::string slopes_path = (fs::path(args.out_dir) / "slopes.csv").string();
  const std::string points_path = (fs::path(args.out_dir) / "points.csv").string();
  const std::string manifest_path = (fs::path(args.out_dir) / "manifest.txt").string();

  std::vector<std::pair<std::string, std::string>> fields = {
      {"subcommand", "experiment"},
      {"preset", args.preset.empty() ? "(none)" : args.preset},
      {"master_seed", std::to_string(args.seed)},
      {"threads", std::to_string(std::max(1, args.threads))}};
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const subopt::ExperimentConfig& cfg = configs[i];
    const std::string p = "config" + std::to_string(i) + ".";
    fields.emplace_back(p + "model", cfg.model_label());
    fields.emplace_back(p + "n", std::to_string(cfg.generator.n_rows));
    fields.emplace_back(p + "delta",
                        subopt::detail::format_double(cfg.generator.delta));
    fields.emplace_back(p + "replications", std::to_string(cfg.replications));
    std::string ms;
    for (subopt::Method m : cfg.methods) {
      if (!ms.empty()) ms += '+';
      ms += subopt::method_name(m);
    }
    fields.emplace_back(p + "methods", ms);
  }
  std::vector<std::string> outputs = {report_path, slopes_path};
  if (args.points) outputs.push_back(points_path);
  write_manifest(manifest_path, command, fields, outputs);

  std::ofstream report_out(report_path);
  std::ofstream slopes_out(slopes_path);
  if (!report_out || !slopes_out) throw subopt::IoError("cannot write report files");
  std::ofstream points_out;
  if (args.points) {
    points_out.open(points_path);
    if (!points_out) throw subopt::IoError("cannot write " + points_path);
    subopt::write_points_header(points_out);
  }
  subopt::write_report_header(report_out);
  subopt::write_slopes_header(slopes_out);

  for (const subopt::ExperimentConfig& cfg : configs) {
    const subopt::ExperimentReport report = subopt::run_experiment(cfg);
    subopt::write_report_rows(report, report_out);
    subopt::write_slopes_rows(report, slopes_out);
    if (args.points) subopt::write_points_rows(report, points_out);
  }
  if (!report_out || !slopes_out) throw subopt::IoError("report write failed");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subsampled optimization: approximate large-scale empirical risk "
               "minimization with quantified error"};
  app.require_subcommand(1);
  const std::string command = join_args(argc, argv);

  GenerateArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("generate", "write a synthetic dataset CSV");
  cmd_gen->add_option("--model", gen.model, "linear|logistic")->required();
  cmd_gen->add_option("--n", gen.n, "number of rows");
  cmd_gen->add_option("--delta", gen.delta, "misspecification degree (>= 0)");
  cmd_gen->add_option("--seed", gen.seed, "generator seed");
  cmd_gen->add_option("--out", gen.out, "output CSV path")->required();
  cmd_gen->add_option("--truth", gen.truth, "truth sidecar path (default <out>.truth.csv)");
  cmd_gen->add_option("--manifest", gen.manifest, "manifest path (default <out>.manifest)");

  FitArgs fit;
  CLI::App* cmd_fit = app.add_subcommand("fit", "fit the full or subsampled model");
  cmd_fit->add_option("--model", fit.model, "linear|logistic")->required();
  cmd_fit->add_option("--input", fit.input, "data CSV (response last column)")->required();
  cmd_fit->add_option("--mode", fit.mode, "full|weighted|equal");
  cmd_fit->add_option("--sampler", fit.sampler, "unif|lev|grad|hessian");
  cmd_fit->add_option("--fraction", fit.fraction, "subsample fraction of N");
  cmd_fit->add_option("--nsub", fit.nsub, "subsample size (overrides --fraction)");
  cmd_fit->add_option("--floor-beta", fit.floor_beta, "uniform mixing floor in [0,1)");
  cmd_fit->add_option("--pilot-size", fit.pilot_size, "pilot size for grad/hessian");
  cmd_fit->add_option("--seed", fit.seed, "sampling seed");
  cmd_fit->add_option("--ci", fit.ci_level, "confidence level; adds mse-hat + region");
  cmd_fit->add_option("--candidate", fit.candidate,
                      "comma-separated candidate theta for the region statistic");
  cmd_fit->add_option("--format", fit.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd_fit->add_option("--out", fit.out, "write lines here instead of stdout");
  cmd_fit->add_option("--manifest", fit.manifest, "manifest path");

  PlanArgs plan;
  CLI::App* cmd_plan = app.add_subcommand("plan", "emit a sampling plan CSV");
  cmd_plan->add_option("--model", plan.model, "linear|logistic")->required();
  cmd_plan->add_option("--input", plan.input, "data CSV")->required();
  cmd_plan->add_option("--sampler", plan.sampler, "unif|lev|grad|hessian");
  cmd_plan->add_option("--floor-beta", plan.floor_beta, "uniform mixing floor");
  cmd_plan->add_option("--pilot-size", plan.pilot_size, "pilot size for grad/hessian");
  cmd_plan->add_option("--seed", plan.seed, "pilot seed");
  cmd_plan->add_flag("--fallback-uniform", plan.fallback_uniform,
                     "fall back to uniform when all scores are zero");
  cmd_plan->add_option("--out", plan.out, "plan CSV path")->required();
  cmd_plan->add_option("--manifest", plan.manifest, "manifest path");

  ReportArgs rep;
  CLI::App* cmd_rep = app.add_subcommand(
      "report", "draw, fit and report a sandwich estimate with its region");
  cmd_rep->add_option("--model", rep.model, "linear|logistic")->required();
  cmd_rep->add_option("--input", rep.input, "data CSV")->required();
  cmd_rep->add_option("--sampler", rep.sampler, "unif|lev|grad|hessian");
  cmd_rep->add_option("--fraction", rep.fraction, "subsample fraction");
  cmd_rep->add_option("--nsub", rep.nsub, "subsample size (overrides --fraction)");
  cmd_rep->add_option("--floor-beta", rep.floor_beta, "uniform mixing floor");
  cmd_rep->add_option("--pilot-size", rep.pilot_size, "pilot size");
  cmd_rep->add_option("--seed", rep.seed, "sampling seed");
  cmd_rep->add_option("--level", rep.level, "confidence level");
  cmd_rep->add_option("--kind", rep.kind, "msehat|amse");
  cmd_rep->add_option("--format", rep.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd_rep->add_option("--out", rep.out, "write lines here instead of stdout");
  cmd_rep->add_option("--manifest", rep.manifest, "manifest path");

  ExperimentArgs exp;
  CLI::App* cmd_exp = app.add_subcommand("experiment", "Monte Carlo experiment runner");
  cmd_exp->add_option("--preset", exp.preset, "paper-linear|paper-logistic|appendix-e");
  cmd_exp->add_option("--config", exp.config_file, "key=value config file");
  cmd_exp->add_option("--model", exp.model, "linear|logistic (when no preset)");
  cmd_exp->add_option("--delta", exp.deltas, "misspecification degree(s)");
  cmd_exp->add_option("--n", exp.n, "dataset rows (default 100000)");
  cmd_exp->add_option("--reps", exp.reps, "replications per cell");
  cmd_exp->add_option("--seed", exp.seed, "master seed");
  cmd_exp->add_option("--fractions", exp.fractions, "comma-separated fractions");
  cmd_exp->add_option("--methods", exp.methods, "comma-separated: unif,lev,grad,hessian");
  cmd_exp->add_option("--weightings", exp.weightings, "comma-separated: ipw,equal");
  cmd_exp->add_option("--levels", exp.levels, "comma-separated confidence levels");
  cmd_exp->add_option("--floor-beta", exp.floor_beta, "uniform mixing floor");
  cmd_exp->add_option("--pilot-cap", exp.pilot_cap, "replication pilot size cap");
  cmd_exp->add_option("--ref-pilot", exp.ref_pilot, "reference pilot size for AMSE");
  cmd_exp->add_option("--threads", exp.threads,
                      "worker threads (env SUBOPT_THREADS; never changes results)");
  cmd_exp->add_option("--out-dir", exp.out_dir, "output directory");
  cmd_exp->add_flag("--points", exp.points, "also write per-fraction log-log points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) return run_generate(gen, command);
    if (cmd_fit->parsed()) return run_fit(fit, command);
    if (cmd_plan->parsed()) return run_plan(plan, command);
    if (cmd_rep->parsed()) return run_report(rep, command);
    if (cmd_exp->parsed()) return run_experiment_cmd(exp, cmd_exp, command);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const subopt::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const subopt::SingularHessian& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSingular;
  } catch (const subopt::SingularGram& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSingular;
  } catch (const subopt::DegeneratePlan& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSingular;
  } catch (const subopt::NoConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const subopt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
