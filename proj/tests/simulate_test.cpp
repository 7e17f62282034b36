#include "subopt/simulate.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace subopt {
namespace {

TEST(GenerateLinear, NarrowComponentCovarianceMatchesTarget) {
  GeneratorSpec spec{GeneratorKind::LinearAR, 100000, 0.0, 11, std::nullopt};
  LinearAux aux;
  const Dataset data = generate_dataset(spec, &aux);
  ASSERT_EQ(data.rows(), 100000);
  ASSERT_EQ(data.cols(), 6);  // intercept + 5 covariates; response held separately

  // sample covariance of the rows drawn from N(0, S), identified via aux
  Eigen::MatrixXd narrow(data.rows(), 5);
  Index count = 0;
  for (Index i = 0; i < data.rows(); ++i) {
    if (!aux.wide_component[static_cast<std::size_t>(i)]) {
      narrow.row(count++) = data.row(i).tail(5);
    }
  }
  narrow.conservativeResize(count, 5);
  EXPECT_GT(count, 70000);
  const Eigen::RowVectorXd mean = narrow.colwise().mean();
  const Eigen::MatrixXd centered = narrow.rowwise() - mean;
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(count - 1);
  for (Index i = 0; i < 5; ++i) {
    for (Index j = 0; j < 5; ++j) {
      EXPECT_NEAR(cov(i, j), std::pow(0.5, std::abs(i - j)), 0.02);
    }
  }
}

TEST(GenerateLinear, CovariatesAreCentered) {
  GeneratorSpec spec{GeneratorKind::LinearAR, 100000, 0.0, 13, std::nullopt};
  const Dataset data = generate_dataset(spec);
  for (Index j = 1; j < 6; ++j) {
    const double mean = data.features().col(j).mean();
    const double sd = std::sqrt(
        (data.features().col(j).array() - mean).square().mean());
    EXPECT_LE(std::abs(mean), 4.0 * sd / std::sqrt(100000.0));
  }
}

TEST(GenerateLinear, FullFitRecoversTruthWithinStandardErrors) {
  GeneratorSpec spec{GeneratorKind::LinearAR, 100000, 0.0, 17, std::nullopt};
  const Dataset data = generate_dataset(spec);
  const LossModel model = LossModel::squared_error(6);
  const Solution sol = solve_full(model, data);
  ASSERT_TRUE(sol.converged);

  // classical OLS standard errors
  const Eigen::VectorXd resid =
      data.features() * sol.theta - data.response();
  const double sigma2 =
      resid.squaredNorm() / static_cast<double>(data.rows() - 6);
  const Eigen::MatrixXd cov =
      sigma2 * (data.features().transpose() * data.features()).inverse();
  const Theta truth = generator_true_theta(spec);
  for (Index j = 0; j < 6; ++j) {
    EXPECT_LE(std::abs(sol.theta(j) - truth(j)), 4.0 * std::sqrt(cov(j, j)));
  }
}

TEST(GenerateLogistic, BalancedAtZeroCoefficients) {
  GeneratorSpec spec{GeneratorKind::LogisticDiag, 100000, 0.0, 19,
                     Eigen::VectorXd::Zero(5)};
  const Dataset data = generate_dataset(spec);
  const double freq = data.response().mean();
  EXPECT_LE(std::abs(freq - 0.5), 4.0 * 0.5 / std::sqrt(100000.0));
}

TEST(GenerateLogistic, CovariateVariancesMatchTarget) {
  GeneratorSpec spec{GeneratorKind::LogisticDiag, 100000, 0.0, 23, std::nullopt};
  const Dataset data = generate_dataset(spec);
  Eigen::VectorXd target(5);
  target << 1, 1, 1, 5, 5;
  for (Index j = 0; j < 5; ++j) {
    const auto col = data.features().col(j + 1).array();
    const double var = (col - col.mean()).square().mean();
    EXPECT_NEAR(var, target(j), 0.05 * target(j));
  }
}

TEST(GenerateLogistic, FullFitRecoversTruthWithinStandardErrors) {
  GeneratorSpec spec{GeneratorKind::LogisticDiag, 100000, 0.0, 29, std::nullopt};
  const Dataset data = generate_dataset(spec);
  const LossModel model = LossModel::logistic(6);
  const Solution sol = solve_full(model, data);
  ASSERT_TRUE(sol.converged);

  // observed Fisher information at the fit
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(6, 6);
  for (Index i = 0; i < data.rows(); ++i) {
    info += model.point_hess(data, sol.theta, i);
  }
  const Eigen::MatrixXd cov = info.inverse();
  const Theta truth = generator_true_theta(spec);
  for (Index j = 0; j < 6; ++j) {
    EXPECT_LE(std::abs(sol.theta(j) - truth(j)), 4.0 * std::sqrt(cov(j, j)));
  }
}

TEST(GenerateLogistic, MisspecificationShiftsIntercept) {
  GeneratorSpec base{GeneratorKind::LogisticDiag, 50000, 0.0, 31, std::nullopt};
  GeneratorSpec shifted = base;
  shifted.delta = 1.0;
  const double y0 = generate_dataset(base).response().mean();
  const double y1 = generate_dataset(shifted).response().mean();
  EXPECT_GT(y1, y0 + 0.01);  // the added positive term raises response rates
}

TEST(MseSlope, ExactPowerLaws) {
  ExperimentReport report;
  report.model_label = "synthetic";
  for (const double n : {500.0, 1000.0, 2000.0, 4000.0, 8000.0}) {
    CellResult inv_n;
    inv_n.method = Method::Unif;
    inv_n.weighting = Weighting::Ipw;
    inv_n.n = static_cast<Index>(n);
    inv_n.kept = 1;
    inv_n.trace_emp = 3.7 / n;
    report.cells.push_back(inv_n);

    CellResult inv_n2 = inv_n;
    inv_n2.method = Method::Grad;
    inv_n2.trace_emp = 0.9 / (n * n);
    report.cells.push_back(inv_n2);
  }
  EXPECT_NEAR(mse_slope(report, Method::Unif), -1.0, 1e-12);
  EXPECT_NEAR(mse_slope(report, Method::Grad), -2.0, 1e-12);
}

ReplicationContext make_context(const LossModel& model, const Dataset& data,
                                const Theta& theta_full, const SamplingPlan& unif,
                                const std::vector<double>& levels,
                                const std::vector<double>& quantiles) {
  return ReplicationContext{model, data,   theta_full, &unif, nullptr,
                            0.05,  2000,   levels,     quantiles};
}

TEST(RunReplication, DeterministicAndCompleteAtFullFraction) {
  GeneratorSpec spec{GeneratorKind::LinearAR, 5000, 0.0, 37, std::nullopt};
  const Dataset data = generate_dataset(spec);
  const LossModel model = LossModel::squared_error(6);
  const Theta theta_full = solve_full(model, data).theta;
  const SamplingPlan unif = uniform_plan(data.rows());
  const std::vector<double> levels = {0.90, 0.95};
  const std::vector<double> quantiles = {chi2_quantile(6, 0.90), chi2_quantile(6, 0.95)};
  const ReplicationContext ctx =
      make_context(model, data, theta_full, unif, levels, quantiles);

  // fraction 1 still samples with replacement; the record is clean and the
  // deviation is at the sampling noise scale
  Rng rng_full = Rng::stream(7, {1});
  const ReplicationRecord at_n =
      run_replication(ctx, Method::Unif, Weighting::Ipw, 1.0, rng_full);
  EXPECT_EQ(at_n.flag, RepFlag::Ok);
  EXPECT_LT(at_n.dev.norm(), 0.5);
  EXPECT_GT(at_n.dev.norm(), 0.0);

  Rng r1 = Rng::stream(7, {2});
  Rng r2 = Rng::stream(7, {2});
  const ReplicationRecord a =
      run_replication(ctx, Method::Unif, Weighting::Ipw, 0.02, r1);
  const ReplicationRecord b =
      run_replication(ctx, Method::Unif, Weighting::Ipw, 0.02, r2);
  EXPECT_EQ(a.dev, b.dev);
  EXPECT_EQ(a.msehat_trace, b.msehat_trace);
  EXPECT_EQ(a.inside, b.inside);
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.generator = {GeneratorKind::LinearAR, 3000, 0.0, 41, std::nullopt};
  cfg.fractions = {0.02, 0.05};
  cfg.replications = 30;
  cfg.methods = {Method::Unif, Method::Hessian};
  cfg.master_seed = 41;
  return cfg;
}

TEST(RunExperiment, BitIdenticalAcrossRerunsAndThreadCounts) {
  ExperimentConfig cfg = small_config();
  const std::string first = report_csv(run_experiment(cfg));
  const std::string second = report_csv(run_experiment(cfg));
  EXPECT_EQ(first, second);

  cfg.threads = 3;
  const std::string threaded = report_csv(run_experiment(cfg));
  EXPECT_EQ(first, threaded);
}

TEST(RunExperiment, SingleReplicationIsOuterProduct) {
  ExperimentConfig cfg = small_config();
  cfg.replications = 1;
  cfg.methods = {Method::Unif};
  cfg.fractions = {0.1};
  const ExperimentReport report = run_experiment(cfg);
  ASSERT_EQ(report.cells.size(), 1u);
  const CellResult& cell = report.cells[0];
  ASSERT_EQ(cell.kept, 1);

  // rank one, positive semidefinite, trace = squared norm of the deviation
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cell.emp_mse);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
  EXPECT_LT(es.eigenvalues()(4), 1e-12 * es.eigenvalues()(5));
  EXPECT_NEAR(cell.trace_emp, es.eigenvalues()(5), 1e-10);
}

TEST(RunExperiment, EmpiricalMseMatricesAreWellFormed) {
  const ExperimentReport report = run_experiment(small_config());
  ASSERT_EQ(report.cells.size(), 4u);
  for (const CellResult& cell : report.cells) {
    EXPECT_EQ(cell.kept, 30);
    EXPECT_LT((cell.emp_mse - cell.emp_mse.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_GT(cell.trace_emp, 0.0);
    EXPECT_GT(cell.amse_ratio, 0.3);
    EXPECT_LT(cell.amse_ratio, 3.0);
  }
  ASSERT_EQ(report.slopes.size(), 2u);
  for (const SlopeRow& s : report.slopes) {
    EXPECT_LT(s.slope, -0.5);
    EXPECT_GT(s.slope, -1.6);
  }
}

TEST(RunExperiment, CoverageSmokeAtModerateScale) {
  ExperimentConfig cfg;
  cfg.generator = {GeneratorKind::LinearAR, 20000, 0.0, 43, std::nullopt};
  cfg.fractions = {0.04};
  cfg.replications = 300;
  cfg.methods = {Method::Unif};
  cfg.master_seed = 43;
  const ExperimentReport report = run_experiment(cfg);
  const CellResult& cell = report.cells.at(0);
  const double cover95 = detail::coverage_at(report, cell, 0.95);
  EXPECT_GE(cover95, 0.88);
  EXPECT_LE(cover95, 0.995);
  EXPECT_EQ(cell.flagged_singular + cell.flagged_noconv, 0);
}

TEST(RunExperiment, EqualWeightingReportsRatio) {
  ExperimentConfig cfg;
  cfg.generator = {GeneratorKind::LinearAR, 4000, 0.0, 47, std::nullopt};
  cfg.fractions = {0.05};
  cfg.replications = 40;
  cfg.methods = {Method::Grad};
  cfg.weightings = {Weighting::Ipw, Weighting::Equal};
  cfg.master_seed = 47;
  const ExperimentReport report = run_experiment(cfg);
  ASSERT_EQ(report.cells.size(), 2u);
  const CellResult* equal = report.find_cell(Method::Grad, Weighting::Equal, 0.05);
  ASSERT_NE(equal, nullptr);
  EXPECT_TRUE(std::isfinite(equal->equal_ipw_ratio));
  EXPECT_GT(equal->equal_ipw_ratio, 0.0);
}

}  // namespace
}  // namespace subopt
