#include "subopt/loss.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "subopt/dataset.hpp"
#include "subopt/rng.hpp"
#include "test_util.hpp"

namespace subopt {
namespace {

using testing::random_linear;
using testing::random_logistic;

Dataset squared_pair() {
  Eigen::MatrixXd x(2, 2);
  x << 1, 0, 1, 2;
  Eigen::VectorXd y(2);
  y << 0, 1;
  return Dataset(x, y);
}

TEST(Dataset, RejectsBadInputs) {
  Eigen::MatrixXd x(2, 1);
  x << 1, 2;
  Eigen::VectorXd y_short(1);
  y_short << 1;
  EXPECT_THROW(Dataset(x, y_short), Error);

  Eigen::MatrixXd bad = x;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Dataset(bad, std::nullopt), Error);

  EXPECT_THROW(Dataset(Eigen::MatrixXd(0, 1), std::nullopt), Error);
}

TEST(Dataset, CsvRoundTripPreservesEveryBit) {
  Rng rng(2);
  const Dataset data = random_linear(50, 3, rng, 0.7);
  const std::string path = ::testing::TempDir() + "dataset_roundtrip.csv";
  data.save_csv(path);
  const Dataset loaded = Dataset::load_csv(path);
  ASSERT_EQ(loaded.rows(), data.rows());
  ASSERT_EQ(loaded.cols(), data.cols());
  EXPECT_EQ((loaded.features() - data.features()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((loaded.response() - data.response()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LossModel, LogisticRequiresBinaryResponse) {
  Eigen::MatrixXd x(2, 1);
  x << 1, 1;
  Eigen::VectorXd y(2);
  y << 0.0, 0.5;
  const Dataset data(x, y);
  EXPECT_THROW(LossModel::logistic(1).check_compatible(data), Error);
  EXPECT_NO_THROW(LossModel::squared_error(1).check_compatible(data));
}

TEST(PointGrad, SquaredError) {
  const Dataset data = squared_pair();
  const LossModel model = LossModel::squared_error(2);

  // zero residual at theta = 0 for the (1,0) -> 0 row
  EXPECT_EQ(model.point_grad(data, Theta::Zero(2), 0), Eigen::Vector2d(0, 0));

  // x=(1,2), y=1, theta=(1,1): residual 2, gradient (2,4)
  Theta theta(2);
  theta << 1, 1;
  const Eigen::VectorXd g = model.point_grad(data, theta, 1);
  EXPECT_NEAR(g(0), 2.0, 1e-15);
  EXPECT_NEAR(g(1), 4.0, 1e-15);
}

TEST(PointGrad, LogisticAtZero) {
  Eigen::MatrixXd x(1, 1);
  x << 1;
  Eigen::VectorXd y(1);
  y << 1;
  const Dataset data(x, y);
  const Eigen::VectorXd g =
      LossModel::logistic(1).point_grad(data, Theta::Zero(1), 0);
  EXPECT_NEAR(g(0), -0.5, 1e-15);
}

TEST(PointHess, OuterProductAndLogisticCurvature) {
  const Dataset data = squared_pair();
  Theta theta(2);
  theta << 1, 1;
  const Eigen::MatrixXd h = LossModel::squared_error(2).point_hess(data, theta, 1);
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 2, 2, 4;
  EXPECT_LT((h - expected).cwiseAbs().maxCoeff(), 1e-15);

  Eigen::MatrixXd x1(1, 1);
  x1 << 1;
  Eigen::VectorXd y1(1);
  y1 << 1;
  const Dataset point(x1, y1);
  const Eigen::MatrixXd hl =
      LossModel::logistic(1).point_hess(point, Theta::Zero(1), 0);
  EXPECT_NEAR(hl(0, 0), 0.25, 1e-15);

  // saturation: large positive linear predictor drives curvature to zero
  Eigen::MatrixXd x2(1, 1);
  x2 << 2;
  const Dataset point2(x2, y1);
  Theta big(1);
  big << 40;
  EXPECT_LT(LossModel::logistic(1).point_hess(point2, big, 0)(0, 0), 1e-15);
}

TEST(FullGrad, CancellationAndOptimality) {
  Eigen::MatrixXd x(2, 2);
  x << 1, 0, 1, 0;
  Eigen::VectorXd y(2);
  y << 1, -1;  // residuals at 0 are -1 and +1 on identical rows
  const Dataset data(x, y);
  const Eigen::VectorXd g =
      full_grad(LossModel::squared_error(2), data, Theta::Zero(2));
  EXPECT_EQ(g(0), 0.0);
  EXPECT_EQ(g(1), 0.0);

  Rng rng(7);
  const Dataset reg = random_linear(200, 3, rng);
  const Theta ols = testing::ols_oracle(reg);
  EXPECT_LE(full_grad(LossModel::squared_error(3), reg, ols).norm(), 1e-10);
}

TEST(FullGrad, MatchesDirectSummation) {
  Rng rng(11);
  const Dataset data = random_logistic(3, 2, rng);
  const LossModel model = LossModel::logistic(2);
  Theta theta(2);
  theta << 0.4, -0.2;
  const Eigen::VectorXd expected = (model.point_grad(data, theta, 0) +
                                    model.point_grad(data, theta, 1) +
                                    model.point_grad(data, theta, 2)) /
                                   3.0;
  EXPECT_LT((full_grad(model, data, theta) - expected).norm(), 1e-14);
}

TEST(FullHess, GramAndSummation) {
  Rng rng(13);
  const Dataset data = random_linear(50, 3, rng);
  const Eigen::MatrixXd h =
      full_hess(LossModel::squared_error(3), data, Theta::Zero(3));
  const Eigen::MatrixXd gram =
      data.features().transpose() * data.features() / 50.0;
  EXPECT_LT((h - gram).cwiseAbs().maxCoeff(), 1e-12);

  Eigen::MatrixXd x1(1, 1);
  x1 << 1;
  Eigen::VectorXd y1(1);
  y1 << 2;
  EXPECT_NEAR(full_hess(LossModel::squared_error(1), Dataset(x1, y1),
                        Theta::Zero(1))(0, 0),
              1.0, 1e-15);

  const Dataset logit = random_logistic(3, 2, rng);
  const LossModel model = LossModel::logistic(2);
  Theta theta(2);
  theta << -0.3, 0.7;
  const Eigen::MatrixXd expected = (model.point_hess(logit, theta, 0) +
                                    model.point_hess(logit, theta, 1) +
                                    model.point_hess(logit, theta, 2)) /
                                   3.0;
  EXPECT_LT((full_hess(model, logit, theta) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

SampleDraw single_draw(Index i, double pi) {
  SampleDraw d;
  d.indices = {i};
  d.pi_values = {pi};
  return d;
}

TEST(WeightedGrad, CollapsesUnderUniformWeights) {
  Rng rng(17);
  const Dataset data = random_linear(12, 2, rng);
  const LossModel model = LossModel::squared_error(2);
  Theta theta(2);
  theta << 0.1, -0.4;

  const SampleDraw everything = SampleDraw::full_enumeration(data.rows());
  EXPECT_LT((weighted_grad(model, data, everything, theta) -
             full_grad(model, data, theta))
                .norm(),
            1e-14);

  // a single uniform draw reduces to the point gradient
  const SampleDraw one = single_draw(5, 1.0 / 12.0);
  EXPECT_EQ(weighted_grad(model, data, one, theta), model.point_grad(data, theta, 5));
}

TEST(WeightedGrad, TwoTermHandSum) {
  Rng rng(19);
  const Dataset data = random_linear(4, 2, rng);
  const LossModel model = LossModel::squared_error(2);
  Theta theta(2);
  theta << 0.3, 0.2;
  SampleDraw d;
  d.indices = {1, 3};
  d.pi_values = {0.2, 0.4};
  const Eigen::VectorXd expected = (model.point_grad(data, theta, 1) / 0.2 +
                                    model.point_grad(data, theta, 3) / 0.4) /
                                   (4.0 * 2.0);
  EXPECT_LT((weighted_grad(model, data, d, theta) - expected).norm(), 1e-14);
}

TEST(WeightedHess, MirrorsGradCases) {
  Rng rng(23);
  const Dataset data = random_logistic(10, 2, rng);
  const LossModel model = LossModel::logistic(2);
  Theta theta(2);
  theta << 0.2, -0.1;

  const SampleDraw everything = SampleDraw::full_enumeration(data.rows());
  EXPECT_LT((weighted_hess(model, data, everything, theta) -
             full_hess(model, data, theta))
                .cwiseAbs()
                .maxCoeff(),
            1e-14);

  const SampleDraw one = single_draw(3, 0.1);
  EXPECT_LT((weighted_hess(model, data, one, theta) -
             model.point_hess(data, theta, 3))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);

  SampleDraw d;
  d.indices = {0, 7};
  d.pi_values = {0.05, 0.3};
  const Eigen::MatrixXd expected = (model.point_hess(data, theta, 0) / 0.05 +
                                    model.point_hess(data, theta, 7) / 0.3) /
                                   (10.0 * 2.0);
  EXPECT_LT((weighted_hess(model, data, d, theta) - expected).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(EqualWeightGrad, EnumerationAndDivergenceFromWeighted) {
  Rng rng(29);
  const Dataset data = random_linear(6, 2, rng);
  const LossModel model = LossModel::squared_error(2);
  Theta theta(2);
  theta << -0.2, 0.5;

  const SampleDraw everything = SampleDraw::full_enumeration(data.rows());
  EXPECT_LT((equal_weight_grad(model, data, everything, theta) -
             full_grad(model, data, theta))
                .norm(),
            1e-14);

  const SampleDraw one = single_draw(2, 0.25);  // pi ignored by equal weighting
  EXPECT_EQ(equal_weight_grad(model, data, one, theta),
            model.point_grad(data, theta, 2));

  SampleDraw d;
  d.indices = {0, 1, 4};
  d.pi_values = {0.5, 0.1, 0.1};
  const Eigen::VectorXd eq = equal_weight_grad(model, data, d, theta);
  const Eigen::VectorXd wt = weighted_grad(model, data, d, theta);
  EXPECT_GT((eq - wt).norm(), 1e-8);
}

TEST(WeightedGrad, ExactlyEqualWeightUnderUniformPi) {
  // N=49 exercises the rounding of N*(1/N); the (1/N)/pi coefficient makes
  // the weighted and equal-weight accumulations identical bit for bit.
  Rng rng(31);
  const Dataset data = random_linear(49, 3, rng);
  const LossModel model = LossModel::squared_error(3);
  Theta theta(3);
  theta << 0.4, 0.1, -0.3;

  SampleDraw d;
  for (int j = 0; j < 20; ++j) {
    d.indices.push_back(static_cast<Index>(rng.uniform_below(49)));
    d.pi_values.push_back(1.0 / 49.0);
  }
  const Eigen::VectorXd wt = weighted_grad(model, data, d, theta);
  const Eigen::VectorXd eq = equal_weight_grad(model, data, d, theta);
  for (Index j = 0; j < 3; ++j) EXPECT_EQ(wt(j), eq(j));
}

TEST(Unbiasedness, ExhaustiveSingleDrawIdentity) {
  // sum_i pi_i * weighted_grad({i}) telescopes to full_grad for any plan.
  Rng rng(37);
  const Dataset data = random_linear(5, 2, rng);
  const LossModel model = LossModel::squared_error(2);
  Theta theta(2);
  theta << 0.7, -0.6;
  Eigen::VectorXd probs(5);
  probs << 0.1, 0.15, 0.2, 0.25, 0.3;

  Eigen::VectorXd expectation = Eigen::VectorXd::Zero(2);
  for (Index i = 0; i < 5; ++i) {
    expectation += probs(i) * weighted_grad(model, data, single_draw(i, probs(i)), theta);
  }
  EXPECT_LT((expectation - full_grad(model, data, theta)).norm(), 1e-12);
}

TEST(FiniteDifferences, GradientAndHessianBothModels) {
  Rng rng(41);
  const Dataset lin = random_linear(8, 3, rng);
  const Dataset logit = random_logistic(8, 3, rng);
  const LossModel sq = LossModel::squared_error(3);
  const LossModel lg = LossModel::logistic(3);
  const double h = 1e-6;

  for (int trial = 0; trial < 5; ++trial) {
    Theta theta(3);
    for (Index j = 0; j < 3; ++j) theta(j) = rng.normal();
    const Index i = static_cast<Index>(rng.uniform_below(8));

    for (const auto& [model, data] : {std::pair{&sq, &lin}, std::pair{&lg, &logit}}) {
      const Eigen::VectorXd g = model->point_grad(*data, theta, i);
      const Eigen::MatrixXd hess = model->point_hess(*data, theta, i);
      for (Index j = 0; j < 3; ++j) {
        Theta up = theta, dn = theta;
        up(j) += h;
        dn(j) -= h;
        const double fd =
            (model->point_loss(*data, up, i) - model->point_loss(*data, dn, i)) /
            (2.0 * h);
        EXPECT_LE(std::abs(fd - g(j)), 1e-5 * std::max(1.0, std::abs(g(j))));

        const Eigen::VectorXd gd =
            (model->point_grad(*data, up, i) - model->point_grad(*data, dn, i)) /
            (2.0 * h);
        for (Index k = 0; k < 3; ++k) {
          EXPECT_LE(std::abs(gd(k) - hess(j, k)),
                    1e-4 * std::max(1.0, std::abs(hess(j, k))));
        }
      }
    }
  }
}

TEST(FullHess, SymmetricPositiveSemidefinite) {
  Rng rng(43);
  const Dataset lin = random_linear(30, 4, rng);
  const Dataset logit = random_logistic(30, 4, rng);
  for (int trial = 0; trial < 3; ++trial) {
    Theta theta(4);
    for (Index j = 0; j < 4; ++j) theta(j) = 2.0 * rng.normal();
    for (const auto& [model, data] :
         {std::pair{LossModel::squared_error(4), &lin},
          std::pair{LossModel::logistic(4), &logit}}) {
      const Eigen::MatrixXd h = full_hess(model, *data, theta);
      EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
      EXPECT_GE(es.eigenvalues().minCoeff(),
                -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()));
    }
  }
}

}  // namespace
}  // namespace subopt
