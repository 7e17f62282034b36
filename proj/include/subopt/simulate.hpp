#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "subopt/chi_square.hpp"
#include "subopt/common.hpp"
#include "subopt/dataset.hpp"
#include "subopt/loss.hpp"
#include "subopt/rng.hpp"
#include "subopt/sampling.hpp"
#include "subopt/solver.hpp"
#include "subopt/uncertainty.hpp"

namespace subopt {

// ---------------------------------------------------------------------------
// Synthetic data generators.
// ---------------------------------------------------------------------------

enum class GeneratorKind { LinearAR, LogisticDiag };

/// LinearAR: 5 covariates from a 3:1 mixture of N(0, S) and N(0, 4S) with
/// S_ij = 0.5^|i-j|, heteroscedastic noise (1 + delta |x_1|) N(0, 10).
/// LogisticDiag: 5 independent covariates with variances (1,1,1,5,5), a
/// delta * z^2 misspecification term (z standard normal, generation only).
/// Both prepend an intercept column; the fitted dimension is 6.
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::LinearAR;
  Index n_rows = 100000;
  double delta = 0.0;
  std::uint64_t seed = 1;
  std::optional<Eigen::VectorXd> coef_override;  // 5 generator coefficients

  void validate() const {
    if (n_rows < 1) throw Error("GeneratorSpec: n_rows must be >= 1");
    if (!(delta >= 0.0)) throw Error("GeneratorSpec: delta must be >= 0");
    if (coef_override && coef_override->size() != 5) {
      throw Error("GeneratorSpec: coefficient override must have length 5");
    }
  }
};

/// The 5 covariate coefficients used during generation.
inline Eigen::VectorXd generator_coefficients(const GeneratorSpec& spec) {
  if (spec.coef_override) return *spec.coef_override;
  Eigen::VectorXd t(5);
  t << 1.0, 1.0, 1.0, 0.1, 0.1;
  return t;
}

/// The coefficient vector in fitted coordinates (intercept prepended).
inline Theta generator_true_theta(const GeneratorSpec& spec) {
  const Eigen::VectorXd t = generator_coefficients(spec);
  Theta full(6);
  full << 0.0, t(0), t(1), t(2), t(3), t(4);
  return full;
}

struct LinearAux {
  std::vector<std::uint8_t> wide_component;  // 1 where the row came from N(0, 4S)
};

inline Dataset generate_linear(const GeneratorSpec& spec, Rng& rng,
                               LinearAux* aux = nullptr) {
  spec.validate();
  if (spec.kind != GeneratorKind::LinearAR) {
    throw Error("generate_linear: wrong generator kind");
  }
  const Index n = spec.n_rows;
  const Eigen::VectorXd coef = generator_coefficients(spec);

  Eigen::MatrixXd ar(5, 5);
  for (Index i = 0; i < 5; ++i) {
    for (Index j = 0; j < 5; ++j) ar(i, j) = std::pow(0.5, std::abs(i - j));
  }
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(ar).matrixL();

  const double noise_sd = std::sqrt(10.0);
  Eigen::MatrixXd features(n, 6);
  Eigen::VectorXd response(n);
  if (aux != nullptr) aux->wide_component.assign(static_cast<std::size_t>(n), 0);

  Eigen::VectorXd z(5);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 5; ++j) z(j) = rng.normal();
    Eigen::VectorXd x = chol * z;
    const bool wide = rng.uniform01() < 0.25;
    if (wide) x *= 2.0;
    if (aux != nullptr && wide) aux->wide_component[static_cast<std::size_t>(i)] = 1;
    const double eps = (1.0 + spec.delta * std::abs(x(0))) * noise_sd * rng.normal();
    features(i, 0) = 1.0;
    features.row(i).tail(5) = x.transpose();
    response(i) = x.dot(coef) + eps;
  }
  return Dataset(std::move(features), std::move(response));
}

inline Dataset generate_logistic(const GeneratorSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.kind != GeneratorKind::LogisticDiag) {
    throw Error("generate_logistic: wrong generator kind");
  }
  const Index n = spec.n_rows;
  const Eigen::VectorXd coef = generator_coefficients(spec);
  Eigen::VectorXd sd(5);
  sd << 1.0, 1.0, 1.0, std::sqrt(5.0), std::sqrt(5.0);

  Eigen::MatrixXd features(n, 6);
  Eigen::VectorXd response(n);
  Eigen::VectorXd x(5);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 5; ++j) x(j) = sd(j) * rng.normal();
    const double extra = rng.normal();  // drawn even at delta=0 to keep streams aligned
    const double eta = x.dot(coef) + spec.delta * extra * extra;
    features(i, 0) = 1.0;
    features.row(i).tail(5) = x.transpose();
    response(i) = rng.uniform01() < detail::sigmoid(eta) ? 1.0 : 0.0;
  }
  return Dataset(std::move(features), std::move(response));
}

namespace detail {
inline constexpr std::uint64_t kStreamGenerator = 0x01;
inline constexpr std::uint64_t kStreamRefPilot = 0x02;
inline constexpr std::uint64_t kStreamReplication = 0x03;
}  // namespace detail

inline Dataset generate_dataset(const GeneratorSpec& spec, LinearAux* aux = nullptr) {
  Rng rng = Rng::stream(spec.seed, {detail::kStreamGenerator});
  if (spec.kind == GeneratorKind::LinearAR) return generate_linear(spec, rng, aux);
  return generate_logistic(spec, rng);
}

inline LossModel model_for(const GeneratorSpec& spec, Index dim = 6) {
  return spec.kind == GeneratorKind::LinearAR ? LossModel::squared_error(dim)
                                              : LossModel::logistic(dim);
}

// ---------------------------------------------------------------------------
// Monte Carlo experiment engine.
// ---------------------------------------------------------------------------

enum class Method { Unif, Lev, Grad, Hessian };
enum class Weighting { Ipw, Equal };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Unif: return "UNIF";
    case Method::Lev: return "LEV";
    case Method::Grad: return "GRAD";
    case Method::Hessian: return "Hessian";
  }
  return "?";
}

inline const char* weighting_name(Weighting w) {
  return w == Weighting::Ipw ? "ipw" : "equal";
}

struct ExperimentConfig {
  GeneratorSpec generator;
  std::vector<double> fractions = {0.005, 0.01, 0.02, 0.04, 0.08};
  int replications = 1000;
  std::vector<Method> methods = {Method::Unif, Method::Grad, Method::Hessian};
  std::vector<Weighting> weightings = {Weighting::Ipw};
  std::vector<double> confidence_levels = {0.90, 0.95};
  std::uint64_t master_seed = 1;
  double floor_beta = 0.05;
  Index pilot_cap = 2000;
  Index ref_pilot_size = 2000;
  int threads = 1;

  void validate() const {
    generator.validate();
    if (fractions.empty()) throw Error("ExperimentConfig: no fractions");
    for (double f : fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw Error("ExperimentConfig: fraction out of (0,1]");
    }
    if (replications < 1) throw Error("ExperimentConfig: replications must be >= 1");
    if (methods.empty()) throw Error("ExperimentConfig: no methods");
    if (weightings.empty()) throw Error("ExperimentConfig: no weightings");
    for (double q : confidence_levels) {
      if (!(q > 0.0 && q < 1.0)) throw Error("ExperimentConfig: level out of (0,1)");
    }
    if (!(floor_beta >= 0.0 && floor_beta < 1.0)) {
      throw Error("ExperimentConfig: floor_beta out of [0,1)");
    }
    if (threads < 1) throw Error("ExperimentConfig: threads must be >= 1");
  }

  std::string model_label() const {
    std::string label =
        generator.kind == GeneratorKind::LinearAR ? "linear" : "logistic";
    if (generator.delta != 0.0) {
      std::ostringstream os;
      os << label << "_delta" << generator.delta;
      label = os.str();
    }
    return label;
  }
};

enum class RepFlag { Ok, SingularHessian, NoConvergence };

struct ReplicationRecord {
  Eigen::VectorXd dev;          // theta_sub - theta_full
  double msehat_trace = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::uint8_t> inside;  // one entry per confidence level (IPW only)
  RepFlag flag = RepFlag::Ok;
};

struct CellResult {
  std::string model_label;
  Method method = Method::Unif;
  Weighting weighting = Weighting::Ipw;
  double fraction = 0.0;
  Index n = 0;
  Eigen::MatrixXd emp_mse;
  double trace_emp = std::numeric_limits<double>::quiet_NaN();
  double amse_trace = std::numeric_limits<double>::quiet_NaN();
  double amse_ratio = std::numeric_limits<double>::quiet_NaN();
  double msehat_ratio = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> coverage;  // aligned with config.confidence_levels
  Index kept = 0;
  Index flagged_singular = 0;
  Index flagged_noconv = 0;
  double equal_ipw_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct SlopeRow {
  std::string model_label;
  Method method = Method::Unif;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
};

/// Shared, immutable state for one experiment's replications.
struct ReplicationContext {
  const LossModel& model;
  const Dataset& data;
  const Theta& theta_full;
  const SamplingPlan* uniform;       // always present
  const SamplingPlan* leverage;      // present when LEV is run
  double floor_beta;
  Index pilot_cap;
  const std::vector<double>& levels;
  const std::vector<double>& level_quantiles;  // chi2_d at each level
};

/// One replication: (re)build the plan, draw n rows, solve, record the
/// deviation, the subsample MSE estimate and confidence-region membership.
/// Failures are recorded as flags, never thrown past this function.
inline ReplicationRecord run_replication(const ReplicationContext& ctx, Method method,
                                         Weighting weighting, double fraction,
                                         Rng& rng) {
  ReplicationRecord rec;
  rec.inside.assign(ctx.levels.size(), 0);
  const Index population = ctx.data.rows();
  const Index n = std::max<Index>(1, static_cast<Index>(
      std::llround(fraction * static_cast<double>(population))));
  try {
    std::optional<Pilot> pilot;
    std::optional<SamplingPlan> local_plan;
    const SamplingPlan* plan = nullptr;
    switch (method) {
      case Method::Unif:
        plan = ctx.uniform;
        break;
      case Method::Lev:
        plan = ctx.leverage;
        break;
      case Method::Grad:
      case Method::Hessian: {
        const Index n0 = std::max<Index>(std::min<Index>(n, ctx.pilot_cap),
                                         ctx.model.dim() + 1);
        pilot = fit_pilot(ctx.model, ctx.data, n0, rng);
        local_plan = method == Method::Grad
                         ? gradient_plan(ctx.model, ctx.data, *pilot, ctx.floor_beta)
                         : hessian_plan(ctx.model, ctx.data, *pilot, ctx.floor_beta);
        plan = &*local_plan;
        break;
      }
    }
    if (plan == nullptr) throw Error("run_replication: no sampling plan");

    const SampleDraw sample = draw(*plan, n, rng);
    const Theta* init = pilot ? &pilot->theta0 : nullptr;
    const Solution sol =
        weighting == Weighting::Ipw
            ? solve_subsample_weighted(ctx.model, ctx.data, sample, init)
            : solve_subsample_equal(ctx.model, ctx.data, sample, init);
    if (!sol.converged || !sol.theta_bounded) {
      rec.flag = RepFlag::NoConvergence;
      return rec;
    }
    rec.dev = sol.theta - ctx.theta_full;

    if (weighting == Weighting::Ipw) {
      const SandwichEstimate est =
          mse_estimate(ctx.model, ctx.data, sample, sol.theta);
      rec.msehat_trace = est.trace();
      const double stat = confidence_statistic(sol.theta, ctx.theta_full, est);
      for (std::size_t k = 0; k < ctx.levels.size(); ++k) {
        rec.inside[k] = stat <= ctx.level_quantiles[k] ? 1 : 0;
      }
    }
  } catch (const SingularHessian&) {
    rec.flag = RepFlag::SingularHessian;
  } catch (const SingularGram&) {
    rec.flag = RepFlag::SingularHessian;
  } catch (const DegeneratePlan&) {
    rec.flag = RepFlag::SingularHessian;
  } catch (const NoConvergence&) {
    rec.flag = RepFlag::NoConvergence;
  }
  return rec;
}

struct ExperimentReport {
  std::string model_label;
  std::vector<double> fractions;
  std::vector<double> confidence_levels;
  std::vector<CellResult> cells;
  std::vector<SlopeRow> slopes;

  const CellResult* find_cell(Method m, Weighting w, double fraction) const {
    for (const CellResult& c : cells) {
      if (c.method == m && c.weighting == w &&
          std::abs(c.fraction - fraction) < 1e-12) {
        return &c;
      }
    }
    return nullptr;
  }

  const SlopeRow* find_slope(Method m) const {
    for (const SlopeRow& s : slopes) {
      if (s.method == m) return &s;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::pair<double, double> log_log_fit(const std::vector<double>& n_values,
                                             const std::vector<double>& traces) {
  const std::size_t k = n_values.size();
  if (k < 2) throw Error("slope: need at least two points");
  double sx = 0, sy = 0;
  std::vector<double> xs(k), ys(k);
  for (std::size_t i = 0; i < k; ++i) {
    xs[i] = std::log(n_values[i]);
    ys[i] = std::log(traces[i]);
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / static_cast<double>(k);
  const double my = sy / static_cast<double>(k);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("slope: degenerate abscissae");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {slope, r2};
}

inline double coverage_at(const ExperimentReport& report, const CellResult& cell,
                          double level) {
  for (std::size_t k = 0; k < report.confidence_levels.size(); ++k) {
    if (std::abs(report.confidence_levels[k] - level) < 1e-9 &&
        k < cell.coverage.size()) {
      return cell.coverage[k];
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Ordinary least-squares slope of log trace(empirical MSE) against log n
/// over the report's IPW cells for one method.
inline double mse_slope(const ExperimentReport& report, Method method) {
  std::vector<double> ns;
  std::vector<double> traces;
  for (const CellResult& c : report.cells) {
    if (c.method == method && c.weighting == Weighting::Ipw && c.kept > 0) {
      ns.push_back(static_cast<double>(c.n));
      traces.push_back(c.trace_emp);
    }
  }
  return detail::log_log_fit(ns, traces).first;
}

inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();

  ExperimentReport report;
  report.model_label = config.model_label();
  report.fractions = config.fractions;
  report.confidence_levels = config.confidence_levels;

  const Dataset data = generate_dataset(config.generator);
  const LossModel model = model_for(config.generator, data.cols());
  model.check_compatible(data);

  const Solution full = solve_full(model, data);
  if (!full.converged) throw NoConvergence("run_experiment: full-data solve failed");
  const Theta& theta_full = full.theta;

  std::vector<double> quantiles;
  quantiles.reserve(config.confidence_levels.size());
  for (double q : config.confidence_levels) {
    quantiles.push_back(chi2_quantile(static_cast<int>(model.dim()), q));
  }

  const SamplingPlan uniform = uniform_plan(data.rows());
  std::optional<SamplingPlan> leverage;
  for (Method m : config.methods) {
    if (m == Method::Lev) {
      leverage = leverage_plan(data, config.floor_beta);
      break;
    }
  }

  const ReplicationContext ctx{model,
                               data,
                               theta_full,
                               &uniform,
                               leverage ? &*leverage : nullptr,
                               config.floor_beta,
                               config.pilot_cap,
                               config.confidence_levels,
                               quantiles};

  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const Method method = config.methods[mi];
    const auto method_id = static_cast<std::uint64_t>(method);

    // AMSE is defined for one probability vector; gradient- and
    // Hessian-based methods get a single reference pilot per experiment
    // while replications refit their own pilots.
    std::optional<SandwichEstimate> amse_base;
    {
      std::optional<SamplingPlan> ref_plan;
      switch (method) {
        case Method::Unif:
          ref_plan = uniform;
          break;
        case Method::Lev:
          ref_plan = *leverage;
          break;
        case Method::Grad:
        case Method::Hessian: {
          Rng ref_rng =
              Rng::stream(config.master_seed, {detail::kStreamRefPilot, method_id});
          const Index n0 = std::max<Index>(
              std::min<Index>(config.ref_pilot_size, data.rows()), model.dim() + 1);
          const Pilot ref_pilot = fit_pilot(model, data, n0, ref_rng);
          ref_plan = method == Method::Grad
                         ? gradient_plan(model, data, ref_pilot, config.floor_beta)
                         : hessian_plan(model, data, ref_pilot, config.floor_beta);
          break;
        }
      }
      amse_base = amse(model, data, *ref_plan, theta_full, 1);
    }

    for (const Weighting weighting : config.weightings) {
      for (std::size_t fi = 0; fi < config.fractions.size(); ++fi) {
        const double fraction = config.fractions[fi];
        const int reps = config.replications;
        std::vector<ReplicationRecord> records(static_cast<std::size_t>(reps));

        const auto run_range = [&](int begin, int stride) {
          for (int r = begin; r < reps; r += stride) {
            Rng rng = Rng::stream(config.master_seed,
                                  {detail::kStreamReplication, method_id,
                                   static_cast<std::uint64_t>(fi),
                                   static_cast<std::uint64_t>(r)});
            records[static_cast<std::size_t>(r)] =
                run_replication(ctx, method, weighting, fraction, rng);
          }
        };

        const int workers = std::max(1, std::min(config.threads, reps));
        if (workers == 1) {
          run_range(0, 1);
        } else {
          std::vector<std::thread> pool;
          std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
          for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
              try {
                run_range(w, workers);
              } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
              }
            });
          }
          for (auto& t : pool) t.join();
          for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
          }
        }

        CellResult cell;
        cell.model_label = report.model_label;
        cell.method = method;
        cell.weighting = weighting;
        cell.fraction = fraction;
        cell.n = std::max<Index>(1, static_cast<Index>(std::llround(
                     fraction * static_cast<double>(data.rows()))));
        cell.emp_mse = Eigen::MatrixXd::Zero(model.dim(), model.dim());
        cell.coverage.assign(config.confidence_levels.size(), 0.0);
        double msehat_sum = 0.0;
        for (const ReplicationRecord& rec : records) {
          if (rec.flag == RepFlag::SingularHessian) {
            ++cell.flagged_singular;
            continue;
          }
          if (rec.flag == RepFlag::NoConvergence) {
            ++cell.flagged_noconv;
            continue;
          }
          ++cell.kept;
          cell.emp_mse.noalias() += rec.dev * rec.dev.transpose();
          if (weighting == Weighting::Ipw) {
            msehat_sum += rec.msehat_trace;
            for (std::size_t k = 0; k < rec.inside.size(); ++k) {
              cell.coverage[k] += rec.inside[k];
            }
          }
        }
        if (cell.kept > 0) {
          cell.emp_mse /= static_cast<double>(cell.kept);
          cell.trace_emp = cell.emp_mse.trace();
          if (weighting == Weighting::Ipw) {
            cell.amse_trace = amse_base->trace() / static_cast<double>(cell.n);
            cell.amse_ratio = cell.amse_trace / cell.trace_emp;
            cell.msehat_ratio =
                msehat_sum / static_cast<double>(cell.kept) / cell.trace_emp;
            for (double& c : cell.coverage) c /= static_cast<double>(cell.kept);
          } else {
            cell.coverage.assign(config.confidence_levels.size(),
                                 std::numeric_limits<double>::quiet_NaN());
          }
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  // Equal-weighting cells report their trace relative to the matching IPW cell.
  for (CellResult& cell : report.cells) {
    if (cell.weighting != Weighting::Equal) continue;
    const CellResult* ipw = report.find_cell(cell.method, Weighting::Ipw, cell.fraction);
    if (ipw != nullptr && ipw->kept > 0 && cell.kept > 0) {
      cell.equal_ipw_ratio = cell.trace_emp / ipw->trace_emp;
    }
  }

  for (Method method : config.methods) {
    std::vector<double> ns;
    std::vector<double> traces;
    for (const CellResult& c : report.cells) {
      if (c.method == method && c.weighting == Weighting::Ipw && c.kept > 0) {
        ns.push_back(static_cast<double>(c.n));
        traces.push_back(c.trace_emp);
      }
    }
    if (ns.size() >= 2) {
      const auto [slope, r2] = detail::log_log_fit(ns, traces);
      report.slopes.push_back({report.model_label, method, slope, r2});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// CSV emission. One header writer plus row writers so multiple reports can
// share a file.
// ---------------------------------------------------------------------------

inline void write_report_header(std::ostream& out) {
  out << "model,method,weighting,fraction,n,trace_emp_mse,amse_ratio,msehat_ratio,"
         "cover90,cover95,equal_ipw_ratio,flagged\n";
}

inline void write_report_rows(const ExperimentReport& report, std::ostream& out) {
  for (const CellResult& c : report.cells) {
    out << c.model_label << ',' << method_name(c.method) << ','
        << weighting_name(c.weighting) << ',' << detail::csv_number(c.fraction) << ','
        << c.n << ',' << detail::csv_number(c.trace_emp) << ','
        << detail::csv_number(c.amse_ratio) << ','
        << detail::csv_number(c.msehat_ratio) << ','
        << detail::csv_number(detail::coverage_at(report, c, 0.90)) << ','
        << detail::csv_number(detail::coverage_at(report, c, 0.95)) << ','
        << detail::csv_number(c.equal_ipw_ratio) << ','
        << c.flagged_singular + c.flagged_noconv << '\n';
  }
}

inline void write_slopes_header(std::ostream& out) {
  out << "model,method,slope,r_squared\n";
}

inline void write_slopes_rows(const ExperimentReport& report, std::ostream& out) {
  for (const SlopeRow& s : report.slopes) {
    out << s.model_label << ',' << method_name(s.method) << ','
        << detail::csv_number(s.slope) << ',' << detail::csv_number(s.r_squared)
        << '\n';
  }
}

inline void write_points_header(std::ostream& out) {
  out << "model,method,weighting,fraction,n,trace_emp_mse,log_n,log_trace_emp_mse\n";
}

inline void write_points_rows(const ExperimentReport& report, std::ostream& out) {
  for (const CellResult& c : report.cells) {
    if (c.kept == 0) continue;
    out << c.model_label << ',' << method_name(c.method) << ','
        << weighting_name(c.weighting) << ',' << detail::csv_number(c.fraction) << ','
        << c.n << ',' << detail::csv_number(c.trace_emp) << ','
        << detail::csv_number(std::log(static_cast<double>(c.n))) << ','
        << detail::csv_number(std::log(c.trace_emp)) << '\n';
  }
}

inline std::string report_csv(const ExperimentReport& report) {
  std::ostringstream os;
  write_report_header(os);
  write_report_rows(report, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Experiment presets.
// ---------------------------------------------------------------------------

inline ExperimentConfig preset_paper_linear(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.generator = {GeneratorKind::LinearAR, 100000, 0.0, seed, std::nullopt};
  cfg.methods = {Method::Unif, Method::Lev, Method::Grad, Method::Hessian};
  cfg.replications = 1000;
  cfg.master_seed = seed;
  return cfg;
}

inline ExperimentConfig preset_paper_logistic(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.generator = {GeneratorKind::LogisticDiag, 100000, 0.0, seed, std::nullopt};
  // Leverage sampling is left out here on purpose: it is dominated by
  // uniform sampling for this model.
  cfg.methods = {Method::Unif, Method::Grad, Method::Hessian};
  cfg.replications = 1000;
  cfg.master_seed = seed;
  return cfg;
}

/// Equal-weighting vs inverse-probability weighting under increasingly
/// misspecified linear generators.
inline std::vector<ExperimentConfig> preset_appendix_e(std::uint64_t seed) {
  std::vector<ExperimentConfig> out;
  for (double delta : {0.0, 0.5, 1.0}) {
    ExperimentConfig cfg;
    cfg.generator = {GeneratorKind::LinearAR, 100000, delta, seed, std::nullopt};
    cfg.methods = {Method::Lev, Method::Grad, Method::Hessian};
    cfg.weightings = {Weighting::Ipw, Weighting::Equal};
    cfg.replications = 300;
    cfg.master_seed = seed;
    out.push_back(std::move(cfg));
  }
  return out;
}

}  // namespace subopt
