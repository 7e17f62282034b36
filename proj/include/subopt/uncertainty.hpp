#pragma once

#include <cmath>
#include <utility>

#include "subopt/chi_square.hpp"
#include "subopt/common.hpp"
#include "subopt/dataset.hpp"
#include "subopt/loss.hpp"
#include "subopt/sample_draw.hpp"
#include "subopt/sampling.hpp"

namespace subopt {

enum class SandwichKind { Amse, MseHat };

/// bread^{-1} * meat * bread^{-1}, tagged with which estimator it is.
struct SandwichEstimate {
  Eigen::MatrixXd matrix;
  SandwichKind kind = SandwichKind::Amse;
  Eigen::MatrixXd bread;
  Eigen::MatrixXd meat;
  Index n = 0;

  double trace() const { return matrix.trace(); }
};

/// Asymptotic MSE of the weighted subsample solution around the full-data
/// solution: Sigma^{-1} [ (1/n)(1/N^2) sum_i (1/pi_i) grad_i grad_i^T ]
/// Sigma^{-1}, evaluated exactly over all N rows.
inline SandwichEstimate amse(const LossModel& model, const Dataset& data,
                             const SamplingPlan& plan, const Theta& theta_full,
                             Index n) {
  if (plan.size() != data.rows()) throw Error("amse: plan/data size mismatch");
  if (n < 1) throw Error("amse: subsample size must be >= 1");

  SandwichEstimate est;
  est.kind = SandwichKind::Amse;
  est.n = n;
  est.bread = full_hess(model, data, theta_full);
  const auto bread_inv = strict_spd_inverse(est.bread);
  if (!bread_inv) throw SingularHessian("amse: full-data Hessian is not invertible");

  const double population = static_cast<double>(data.rows());
  const Eigen::VectorXd scales = model.grad_scales(data, theta_full);
  Eigen::VectorXd weights(data.rows());
  const double scale = 1.0 / (static_cast<double>(n) * population);
  for (Index i = 0; i < data.rows(); ++i) {
    const double c = (1.0 / population) / plan.prob(i);
    weights(i) = scale * c * scales(i) * scales(i);
  }
  est.meat = symmetrize(data.features().transpose() * weights.asDiagonal() *
                        data.features());
  est.matrix = symmetrize(*bread_inv * est.meat * *bread_inv);
  return est;
}

/// Subsample-only MSE estimator: Sigma_hat^{-1} [ (1/n^2)(1/N^2)
/// sum_{j in S} (1/pi_j^2) grad_j grad_j^T ] Sigma_hat^{-1}. Throws
/// SingularHessian when the subsample Hessian is not invertible, which is
/// exactly the event the estimator's validity is conditioned on; callers
/// record the event and skip the replication.
inline SandwichEstimate mse_estimate(const LossModel& model, const Dataset& data,
                                     const SampleDraw& draw, const Theta& theta_sub) {
  draw.validate(data.rows());
  SandwichEstimate est;
  est.kind = SandwichKind::MseHat;
  est.n = draw.size();
  est.bread = weighted_hess(model, data, draw, theta_sub);
  const auto bread_inv = strict_spd_inverse(est.bread);
  if (!bread_inv) {
    throw SingularHessian("mse_estimate: subsample Hessian is not invertible");
  }

  const double population = static_cast<double>(data.rows());
  const double inv_n = 1.0 / static_cast<double>(draw.size());
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(model.dim(), model.dim());
  for (Index j = 0; j < draw.size(); ++j) {
    const Index i = draw.indices[static_cast<std::size_t>(j)];
    const double c =
        (1.0 / population) / draw.pi_values[static_cast<std::size_t>(j)];
    const double s = model.grad_scale(data.row(i).dot(theta_sub), data.response()(i));
    meat.selfadjointView<Eigen::Lower>().rankUpdate(
        data.row(i).transpose(), inv_n * inv_n * c * c * s * s);
  }
  est.meat = symmetrize(Eigen::MatrixXd(meat.selfadjointView<Eigen::Lower>()));
  est.matrix = symmetrize(*bread_inv * est.meat * *bread_inv);
  return est;
}

/// Mean squared prediction error of a smooth functional g:
/// grad(g)^T * estimate * grad(g).
inline double mspe(const Eigen::VectorXd& g_grad, const SandwichEstimate& est) {
  if (g_grad.size() != est.matrix.rows()) throw Error("mspe: gradient length mismatch");
  return g_grad.dot(est.matrix * g_grad);
}

struct ConfidenceSpec {
  double level = 0.95;
  int dof = 1;

  ConfidenceSpec(double q, int d) : level(q), dof(d) {
    if (!(q > 0.0 && q < 1.0)) throw Error("ConfidenceSpec: level must be in (0,1)");
    if (d < 1) throw Error("ConfidenceSpec: dof must be >= 1");
  }
};

/// Value of the ellipsoidal statistic (theta_sub - candidate)^T est^{-1}
/// (theta_sub - candidate).
inline double confidence_statistic(const Theta& theta_sub, const Theta& candidate,
                                   const SandwichEstimate& est) {
  const auto inv = strict_spd_inverse(est.matrix);
  if (!inv) throw SingularHessian("confidence region: estimate is not invertible");
  const Eigen::VectorXd dev = theta_sub - candidate;
  return dev.dot(*inv * dev);
}

inline bool in_confidence_region(const Theta& theta_sub, const Theta& candidate,
                                 const SandwichEstimate& est, const ConfidenceSpec& spec) {
  return confidence_statistic(theta_sub, candidate, est) <=
         chi2_quantile(spec.dof, spec.level);
}

}  // namespace subopt
