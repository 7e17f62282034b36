#pragma once

#include <cmath>

#include "subopt/common.hpp"
#include "subopt/dataset.hpp"
#include "subopt/sample_draw.hpp"

namespace subopt {

enum class LossKind { SquaredError, Logistic };

namespace detail {

inline double sigmoid(double eta) {
  if (eta >= 0.0) {
    return 1.0 / (1.0 + std::exp(-eta));
  }
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

inline double softplus(double eta) {
  // log(1 + exp(eta)) without overflow.
  return (eta > 0.0 ? eta : 0.0) + std::log1p(std::exp(-std::abs(eta)));
}

}  // namespace detail

/// Per-point loss evaluator. Both supported losses factor through the linear
/// predictor eta = x^T theta: the gradient is grad_scale(eta, y) * x and the
/// Hessian is hess_weight(eta, y) * x x^T, which the batch code exploits.
class LossModel {
 public:
  LossModel(LossKind kind, Index dim) : kind_(kind), dim_(dim) {
    if (dim < 1) throw Error("LossModel: dimension must be positive");
  }

  static LossModel squared_error(Index dim) { return {LossKind::SquaredError, dim}; }
  static LossModel logistic(Index dim) { return {LossKind::Logistic, dim}; }

  LossKind kind() const { return kind_; }
  Index dim() const { return dim_; }

  void check_compatible(const Dataset& data) const {
    if (data.cols() != dim_) throw Error("LossModel: dimension mismatch");
    if (!data.has_response()) throw Error("LossModel: response required");
    if (kind_ == LossKind::Logistic) {
      const Eigen::VectorXd& y = data.response();
      for (Index i = 0; i < y.size(); ++i) {
        if (y(i) != 0.0 && y(i) != 1.0) {
          throw Error("LossModel: logistic response must be 0/1");
        }
      }
    }
  }

  double loss_at(double eta, double y) const {
    if (kind_ == LossKind::SquaredError) {
      const double r = eta - y;
      return 0.5 * r * r;
    }
    return detail::softplus(eta) - y * eta;
  }

  /// s with grad = s * x: residual for squared error, p - y for logistic.
  double grad_scale(double eta, double y) const {
    if (kind_ == LossKind::SquaredError) return eta - y;
    return detail::sigmoid(eta) - y;
  }

  /// w with hess = w * x x^T: 1 for squared error, p(1-p) for logistic.
  double hess_weight(double eta, double y) const {
    if (kind_ == LossKind::SquaredError) return 1.0;
    const double p = detail::sigmoid(eta);
    return p * (1.0 - p);
  }

  double point_loss(const Dataset& data, const Theta& theta, Index i) const {
    return loss_at(data.row(i).dot(theta), data.response()(i));
  }

  Eigen::VectorXd point_grad(const Dataset& data, const Theta& theta, Index i) const {
    const double s = grad_scale(data.row(i).dot(theta), data.response()(i));
    return s * data.row(i).transpose();
  }

  Eigen::MatrixXd point_hess(const Dataset& data, const Theta& theta, Index i) const {
    const double w = hess_weight(data.row(i).dot(theta), data.response()(i));
    return w * (data.row(i).transpose() * data.row(i));
  }

  /// grad_scale of every row at once; plan builders score all N rows from
  /// this single pass.
  Eigen::VectorXd grad_scales(const Dataset& data, const Theta& theta) const {
    Eigen::VectorXd s = data.features() * theta;
    const Eigen::VectorXd& y = data.response();
    for (Index i = 0; i < s.size(); ++i) s(i) = grad_scale(s(i), y(i));
    return s;
  }

 private:
  LossKind kind_;
  Index dim_;
};

// ---------------------------------------------------------------------------
// Aggregate gradients / Hessians. The weighted versions accumulate with the
// per-draw coefficient c_j = (1/N) / pi_j and divide the sum by n, so that a
// uniform plan makes c_j exactly 1.0 and the weighted and equal-weight sums
// agree bit for bit.
// ---------------------------------------------------------------------------

inline double full_value(const LossModel& model, const Dataset& data, const Theta& theta) {
  const Eigen::VectorXd eta = data.features() * theta;
  const Eigen::VectorXd& y = data.response();
  double sum = 0.0;
  for (Index i = 0; i < eta.size(); ++i) sum += model.loss_at(eta(i), y(i));
  return sum / static_cast<double>(data.rows());
}

inline Eigen::VectorXd full_grad(const LossModel& model, const Dataset& data,
                                 const Theta& theta) {
  Eigen::VectorXd s = model.grad_scales(data, theta);
  return data.features().transpose() * s / static_cast<double>(data.rows());
}

inline Eigen::MatrixXd full_hess(const LossModel& model, const Dataset& data,
                                 const Theta& theta) {
  if (model.kind() == LossKind::SquaredError) {
    return data.features().transpose() * data.features() /
           static_cast<double>(data.rows());
  }
  Eigen::VectorXd w = data.features() * theta;
  const Eigen::VectorXd& y = data.response();
  for (Index i = 0; i < w.size(); ++i) w(i) = model.hess_weight(w(i), y(i));
  w /= static_cast<double>(data.rows());
  return data.features().transpose() * w.asDiagonal() * data.features();
}

namespace detail {

/// 1/(N n pi_j) written as ((1/N)/pi_j)/n; for pi = 1/N the coefficient is
/// exactly 1 in floating point.
inline double draw_coefficient(double pi, Index population) {
  return (1.0 / static_cast<double>(population)) / pi;
}

}  // namespace detail

inline double weighted_value(const LossModel& model, const Dataset& data,
                             const SampleDraw& draw, const Theta& theta) {
  double sum = 0.0;
  for (Index j = 0; j < draw.size(); ++j) {
    const Index i = draw.indices[static_cast<std::size_t>(j)];
    const double c = detail::draw_coefficient(draw.pi_values[static_cast<std::size_t>(j)],
                                              data.rows());
    sum += c * model.point_loss(data, theta, i);
  }
  return sum / static_cast<double>(draw.size());
}

inline Eigen::VectorXd weighted_grad(const LossModel& model, const Dataset& data,
                                     const SampleDraw& draw, const Theta& theta) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.dim());
  for (Index j = 0; j < draw.size(); ++j) {
    const Index i = draw.indices[static_cast<std::size_t>(j)];
    const double c = detail::draw_coefficient(draw.pi_values[static_cast<std::size_t>(j)],
                                              data.rows());
    const double s = model.grad_scale(data.row(i).dot(theta), data.response()(i));
    sum += (c * s) * data.row(i).transpose();
  }
  return sum / static_cast<double>(draw.size());
}

inline Eigen::MatrixXd weighted_hess(const LossModel& model, const Dataset& data,
                                     const SampleDraw& draw, const Theta& theta) {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(model.dim(), model.dim());
  for (Index j = 0; j < draw.size(); ++j) {
    const Index i = draw.indices[static_cast<std::size_t>(j)];
    const double c = detail::draw_coefficient(draw.pi_values[static_cast<std::size_t>(j)],
                                              data.rows());
    const double w = model.hess_weight(data.row(i).dot(theta), data.response()(i));
    sum.selfadjointView<Eigen::Lower>().rankUpdate(data.row(i).transpose(), c * w);
  }
  sum /= static_cast<double>(draw.size());
  return Eigen::MatrixXd(sum.selfadjointView<Eigen::Lower>());
}

inline double equal_weight_value(const LossModel& model, const Dataset& data,
                                 const SampleDraw& draw, const Theta& theta) {
  double sum = 0.0;
  for (Index j = 0; j < draw.size(); ++j) {
    sum += model.point_loss(data, theta, draw.indices[static_cast<std::size_t>(j)]);
  }
  return sum / static_cast<double>(draw.size());
}

inline Eigen::VectorXd equal_weight_grad(const LossModel& model, const Dataset& data,
                                         const SampleDraw& draw, const Theta& theta) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.dim());
  for (Index j = 0; j < draw.size(); ++j) {
    const Index i = draw.indices[static_cast<std::size_t>(j)];
    const double s = model.grad_scale(data.row(i).dot(theta), data.response()(i));
    sum += s * data.row(i).transpose();
  }
  return sum / static_cast<double>(draw.size());
}

inline Eigen::MatrixXd equal_weight_hess(const LossModel& model, const Dataset& data,
                                         const SampleDraw& draw, const Theta& theta) {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(model.dim(), model.dim());
  for (Index j = 0; j < draw.size(); ++j) {
    const Index i = draw.indices[static_cast<std::size_t>(j)];
    const double w = model.hess_weight(data.row(i).dot(theta), data.response()(i));
    sum.selfadjointView<Eigen::Lower>().rankUpdate(data.row(i).transpose(), w);
  }
  sum /= static_cast<double>(draw.size());
  return Eigen::MatrixXd(sum.selfadjointView<Eigen::Lower>());
}

}  // namespace subopt
