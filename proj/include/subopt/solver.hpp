#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "subopt/common.hpp"
#include "subopt/dataset.hpp"
#include "subopt/loss.hpp"
#include "subopt/sample_draw.hpp"

namespace subopt {

struct SolveSpec {
  Theta init;
  double tol_grad = 1e-10;  // relative to max(1, ||g0||)
  int max_iter = 100;
  double ridge0 = 0.0;

  static SolveSpec zeros(Index dim) {
    SolveSpec s;
    s.init = Theta::Zero(dim);
    return s;
  }
};

struct Solution {
  Theta theta;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  Eigen::MatrixXd final_hess;
  bool theta_bounded = true;  // false once ||theta|| exceeds 1e6
  bool ridge_used = false;
};

// ---------------------------------------------------------------------------
// Risk objectives. Each exposes value/grad/hess at a given theta; the solver
// is generic over them. Subsample risks gather their rows once so the
// per-iteration cost is O(n d^2) regardless of N.
// ---------------------------------------------------------------------------

/// Mean loss over the whole dataset.
class FullRisk {
 public:
  FullRisk(const LossModel& model, const Dataset& data) : model_(model), data_(data) {}

  Index dim() const { return model_.dim(); }
  double value(const Theta& t) const { return full_value(model_, data_, t); }
  Eigen::VectorXd grad(const Theta& t) const { return full_grad(model_, data_, t); }
  Eigen::MatrixXd hess(const Theta& t) const { return full_hess(model_, data_, t); }

 private:
  LossModel model_;  // by value: cheap, and temporaries are common at call sites
  const Dataset& data_;
};

/// Weighted mean loss over gathered rows: sum_j w_j f(x_j^T theta, y_j).
/// Covers the inverse-probability-weighted subsample risk (w_j = c_j / n),
/// the equal-weight variant (w_j = 1/n) and the pilot risk over an index
/// subset (w_j = 1/n0).
class SampleRisk {
 public:
  static SampleRisk weighted(const LossModel& model, const Dataset& data,
                             const SampleDraw& draw) {
    draw.validate(data.rows());
    Eigen::VectorXd w(draw.size());
    const double inv_n = 1.0 / static_cast<double>(draw.size());
    for (Index j = 0; j < draw.size(); ++j) {
      w(j) = detail::draw_coefficient(draw.pi_values[static_cast<std::size_t>(j)],
                                      data.rows()) *
             inv_n;
    }
    return SampleRisk(model, data, draw.indices, std::move(w));
  }

  static SampleRisk equal(const LossModel& model, const Dataset& data,
                          const SampleDraw& draw) {
    draw.validate(data.rows());
    Eigen::VectorXd w = Eigen::VectorXd::Constant(
        draw.size(), 1.0 / static_cast<double>(draw.size()));
    return SampleRisk(model, data, draw.indices, std::move(w));
  }

  static SampleRisk subset(const LossModel& model, const Dataset& data,
                           const std::vector<Index>& rows) {
    if (rows.empty()) throw Error("SampleRisk: empty subset");
    Eigen::VectorXd w = Eigen::VectorXd::Constant(
        static_cast<Index>(rows.size()), 1.0 / static_cast<double>(rows.size()));
    return SampleRisk(model, data, rows, std::move(w));
  }

  Index dim() const { return x_.cols(); }

  double value(const Theta& t) const {
    const Eigen::VectorXd eta = x_ * t;
    double sum = 0.0;
    for (Index j = 0; j < eta.size(); ++j) {
      sum += w_(j) * model_.loss_at(eta(j), y_(j));
    }
    return sum;
  }

  Eigen::VectorXd grad(const Theta& t) const {
    Eigen::VectorXd s = x_ * t;
    for (Index j = 0; j < s.size(); ++j) s(j) = w_(j) * model_.grad_scale(s(j), y_(j));
    return x_.transpose() * s;
  }

  Eigen::MatrixXd hess(const Theta& t) const {
    Eigen::VectorXd h = x_ * t;
    for (Index j = 0; j < h.size(); ++j) h(j) = w_(j) * model_.hess_weight(h(j), y_(j));
    return x_.transpose() * h.asDiagonal() * x_;
  }

 private:
  SampleRisk(const LossModel& model, const Dataset& data,
             const std::vector<Index>& rows, Eigen::VectorXd w)
      : model_(model), w_(std::move(w)) {
    x_.resize(static_cast<Index>(rows.size()), data.cols());
    y_.resize(static_cast<Index>(rows.size()));
    const Eigen::VectorXd& resp = data.response();
    for (std::size_t j = 0; j < rows.size(); ++j) {
      x_.row(static_cast<Index>(j)) = data.row(rows[j]);
      y_(static_cast<Index>(j)) = resp(rows[j]);
    }
  }

  LossModel model_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd w_;
};

namespace detail {

/// Solves (H + ridge I) p = -g by Cholesky, escalating the ridge when the
/// factorization fails or does not produce a finite descent direction.
inline Eigen::VectorXd newton_step(const Eigen::MatrixXd& hess,
                                   const Eigen::VectorXd& grad, double ridge0,
                                   bool* ridge_used) {
  const Index d = hess.rows();
  const auto attempt = [&](double ridge) -> std::pair<bool, Eigen::VectorXd> {
    Eigen::MatrixXd h = hess;
    if (ridge > 0.0) h.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) return {false, {}};
    Eigen::VectorXd p = llt.solve(-grad);
    if (!p.allFinite() || grad.dot(p) >= 0.0) return {false, {}};
    return {true, std::move(p)};
  };

  if (auto [ok, p] = attempt(ridge0); ok) {
    if (ridge0 > 0.0) *ridge_used = true;
    return p;
  }
  double ridge = std::max(ridge0, 1e-8 * hess.trace() / static_cast<double>(d));
  for (int k = 0; k <= 6; ++k) {
    if (auto [ok, p] = attempt(ridge); ok) {
      *ridge_used = true;
      return p;
    }
    ridge *= 2.0;
  }
  throw SingularHessian("newton_step: ridge escalation exhausted");
}

struct NoopIterationCallback {
  void operator()(const Theta&, double, double) const {}
};

}  // namespace detail

/// Damped Newton with Armijo backtracking. Non-convergence is reported in
/// the Solution (best iterate, converged=false), never thrown; a Hessian
/// that stays unusable through the ridge escalation throws SingularHessian.
template <class Objective, class IterationCallback = detail::NoopIterationCallback>
Solution newton_solve(const Objective& objective, const SolveSpec& spec,
                      IterationCallback on_accept = {}) {
  if (spec.tol_grad <= 0.0) throw Error("SolveSpec: tol_grad must be positive");
  if (spec.max_iter < 1) throw Error("SolveSpec: max_iter must be >= 1");
  if (!spec.init.allFinite() || spec.init.size() != objective.dim()) {
    throw Error("SolveSpec: bad initial point");
  }

  constexpr double kArmijoSlope = 1e-4;
  constexpr int kMaxHalvings = 40;
  constexpr double kStepTol = 1e-14;
  constexpr double kThetaBound = 1e6;

  Solution sol;
  sol.theta = spec.init;
  double value = objective.value(sol.theta);
  Eigen::VectorXd grad = objective.grad(sol.theta);
  const double grad_ref = std::max(1.0, grad.norm());

  for (int it = 0; it < spec.max_iter; ++it) {
    sol.grad_norm = grad.norm();
    if (sol.grad_norm <= spec.tol_grad * grad_ref) {
      sol.converged = true;
      break;
    }

    const Eigen::MatrixXd hess = objective.hess(sol.theta);
    const Eigen::VectorXd dir =
        detail::newton_step(hess, grad, spec.ridge0, &sol.ridge_used);
    const double slope = grad.dot(dir);

    double t = 1.0;
    bool accepted = false;
    double trial_value = 0.0;
    Theta trial;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      trial = sol.theta + t * dir;
      trial_value = objective.value(trial);
      if (trial_value <= value + kArmijoSlope * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // stalled: flat to machine precision

    const double step_norm = t * dir.norm();
    sol.theta = std::move(trial);
    value = trial_value;
    grad = objective.grad(sol.theta);
    ++sol.iterations;
    on_accept(sol.theta, value, grad.norm());

    if (sol.theta.norm() > kThetaBound) {
      sol.theta_bounded = false;
      break;
    }
    if (step_norm <= kStepTol) {
      sol.converged = true;
      break;
    }
  }

  sol.grad_norm = grad.norm();
  if (sol.grad_norm <= spec.tol_grad * grad_ref && sol.theta_bounded) {
    sol.converged = true;
  }
  sol.final_hess = objective.hess(sol.theta);
  return sol;
}

inline Solution solve_full(const LossModel& model, const Dataset& data) {
  model.check_compatible(data);
  return newton_solve(FullRisk(model, data), SolveSpec::zeros(model.dim()));
}

inline Solution solve_full(const LossModel& model, const Dataset& data,
                           const SolveSpec& spec) {
  model.check_compatible(data);
  return newton_solve(FullRisk(model, data), spec);
}

inline Solution solve_subsample_weighted(const LossModel& model, const Dataset& data,
                                         const SampleDraw& draw,
                                         const Theta* init = nullptr) {
  SolveSpec spec = SolveSpec::zeros(model.dim());
  if (init != nullptr) spec.init = *init;
  return newton_solve(SampleRisk::weighted(model, data, draw), spec);
}

inline Solution solve_subsample_equal(const LossModel& model, const Dataset& data,
                                      const SampleDraw& draw,
                                      const Theta* init = nullptr) {
  SolveSpec spec = SolveSpec::zeros(model.dim());
  if (init != nullptr) spec.init = *init;
  return newton_solve(SampleRisk::equal(model, data, draw), spec);
}

}  // namespace subopt
