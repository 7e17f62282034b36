#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "subopt/common.hpp"
#include "subopt/dataset.hpp"
#include "subopt/loss.hpp"
#include "subopt/rng.hpp"
#include "subopt/sample_draw.hpp"
#include "subopt/solver.hpp"

namespace subopt {

/// Walker/Vose alias table: O(N) build, O(1) per draw.
class AliasTable {
 public:
  explicit AliasTable(const Eigen::VectorXd& probs) {
    const Index n = probs.size();
    accept_.resize(static_cast<std::size_t>(n));
    alias_.resize(static_cast<std::size_t>(n), 0);
    std::vector<double> scaled(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      scaled[static_cast<std::size_t>(i)] = probs(i) * static_cast<double>(n);
    }
    std::vector<Index> small;
    std::vector<Index> large;
    small.reserve(static_cast<std::size_t>(n));
    large.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      (scaled[static_cast<std::size_t>(i)] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const Index s = small.back();
      const Index l = large.back();
      small.pop_back();
      large.pop_back();
      accept_[static_cast<std::size_t>(s)] = scaled[static_cast<std::size_t>(s)];
      alias_[static_cast<std::size_t>(s)] = l;
      scaled[static_cast<std::size_t>(l)] -= 1.0 - scaled[static_cast<std::size_t>(s)];
      (scaled[static_cast<std::size_t>(l)] < 1.0 ? small : large).push_back(l);
    }
    for (Index i : large) accept_[static_cast<std::size_t>(i)] = 1.0;
    for (Index i : small) accept_[static_cast<std::size_t>(i)] = 1.0;
  }

  Index size() const { return static_cast<Index>(accept_.size()); }

  Index sample(Rng& rng) const {
    const auto slot = static_cast<std::size_t>(
        rng.uniform_below(static_cast<std::uint64_t>(accept_.size())));
    return rng.uniform01() < accept_[slot] ? static_cast<Index>(slot) : alias_[slot];
  }

  /// Recovers the probability vector the table encodes; matches the input
  /// within 1e-12 per entry.
  Eigen::VectorXd reconstruct() const {
    const Index n = size();
    Eigen::VectorXd probs = Eigen::VectorXd::Zero(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Index i = 0; i < n; ++i) {
      probs(i) += accept_[static_cast<std::size_t>(i)] * inv_n;
      probs(alias_[static_cast<std::size_t>(i)]) +=
          (1.0 - accept_[static_cast<std::size_t>(i)]) * inv_n;
    }
    return probs;
  }

 private:
  std::vector<double> accept_;
  std::vector<Index> alias_;
};

/// Mixes raw nonnegative scores with the uniform distribution:
/// pi_i = (1-beta) * s_i / sum(s) + beta / N, so that N * pi_i >= beta.
/// The floor keeps the inverse-probability weights bounded.
inline Eigen::VectorXd apply_floor(const Eigen::VectorXd& raw_scores, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw Error("apply_floor: beta must be in [0,1)");
  const Index n = raw_scores.size();
  if (n < 1) throw Error("apply_floor: empty score vector");
  for (Index i = 0; i < n; ++i) {
    if (!(raw_scores(i) >= 0.0) || !std::isfinite(raw_scores(i))) {
      throw Error("apply_floor: scores must be finite and nonnegative");
    }
  }
  const double total = compensated_sum(raw_scores);
  if (!(total > 0.0)) throw DegeneratePlan("apply_floor: all scores are zero");
  const double mix = (1.0 - beta) / total;
  const double floor = beta / static_cast<double>(n);
  Eigen::VectorXd probs(n);
  for (Index i = 0; i < n; ++i) probs(i) = mix * raw_scores(i) + floor;
  return probs;
}

/// Normalized sampling probabilities over the N rows plus an alias table for
/// O(1) draws. Immutable after construction.
class SamplingPlan {
 public:
  SamplingPlan(Eigen::VectorXd probs, double floor_beta)
      : probs_(std::move(probs)), floor_beta_(floor_beta), table_(probs_) {
    const Index n = probs_.size();
    if (n < 1) throw Error("SamplingPlan: empty probability vector");
    if (!(floor_beta_ >= 0.0 && floor_beta_ < 1.0)) {
      throw Error("SamplingPlan: floor must be in [0,1)");
    }
    // Rows with zero probability are legal at floor 0 (they are simply
    // never drawn); any positive floor forces every entry positive.
    const double slack = 1.0 - 1e-12;
    for (Index i = 0; i < n; ++i) {
      if (!(probs_(i) >= 0.0) || !std::isfinite(probs_(i))) {
        throw Error("SamplingPlan: probabilities must be finite and nonnegative");
      }
      if (static_cast<double>(n) * probs_(i) < floor_beta_ * slack) {
        throw Error("SamplingPlan: floor violated");
      }
    }
    if (std::abs(compensated_sum(probs_) - 1.0) > 1e-12) {
      throw Error("SamplingPlan: probabilities must sum to 1");
    }
    id_ = hash_probs(probs_);
  }

  Index size() const { return probs_.size(); }
  const Eigen::VectorXd& probs() const { return probs_; }
  double prob(Index i) const { return probs_(i); }
  double floor_beta() const { return floor_beta_; }
  const AliasTable& table() const { return table_; }

  /// Content hash; stamped onto draws as provenance.
  std::uint64_t id() const { return id_; }

  void save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (Index i = 0; i < probs_.size(); ++i) {
      out << i << ',' << detail::format_double(probs_(i)) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
  }

  static SamplingPlan load_csv(const std::string& path, double floor_beta = 0.0) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<double> probs;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw IoError(path + ": expected index,probability");
      const auto idx = static_cast<std::size_t>(std::stoll(line.substr(0, comma)));
      if (idx != probs.size()) throw IoError(path + ": rows out of order");
      probs.push_back(std::stod(line.substr(comma + 1)));
    }
    if (probs.empty()) throw IoError(path + ": empty plan");
    Eigen::VectorXd v =
        Eigen::Map<Eigen::VectorXd>(probs.data(), static_cast<Index>(probs.size()));
    return SamplingPlan(std::move(v), floor_beta);
  }

 private:
  static std::uint64_t hash_probs(const Eigen::VectorXd& probs) {
    std::uint64_t h = 0x9d3f7ac5u;
    for (Index i = 0; i < probs.size(); ++i) {
      std::uint64_t bits = 0;
      const double v = probs(i);
      std::memcpy(&bits, &v, sizeof(bits));
      h ^= bits;
      h = detail::splitmix64(h);
    }
    return h;
  }

  Eigen::VectorXd probs_;
  double floor_beta_;
  AliasTable table_;
  std::uint64_t id_ = 0;
};

// ---------------------------------------------------------------------------
// Plan constructors.
// ---------------------------------------------------------------------------

inline SamplingPlan uniform_plan(Index population) {
  if (population < 1) throw Error("uniform_plan: population must be >= 1");
  return SamplingPlan(
      Eigen::VectorXd::Constant(population, 1.0 / static_cast<double>(population)),
      0.0);
}

/// Statistical leverages h_ii = x_i^T (X^T X)^{-1} x_i as raw scores.
inline SamplingPlan leverage_plan(const Dataset& data, double floor_beta) {
  const Eigen::MatrixXd& x = data.features();
  const Eigen::MatrixXd gram = x.transpose() * x;
  const auto inv = strict_spd_inverse(gram);
  if (!inv) throw SingularGram("leverage_plan: X^T X is rank deficient");
  const Eigen::MatrixXd projected = x * (*inv);
  const Eigen::VectorXd scores = (projected.array() * x.array()).rowwise().sum();
  return SamplingPlan(apply_floor(scores.cwiseMax(0.0), floor_beta), floor_beta);
}

/// Pilot solution and Hessian from a small uniform pre-sample; scores the
/// gradient- and Hessian-based plans.
struct Pilot {
  Theta theta0;
  Eigen::MatrixXd sigma0;
  Index n0 = 0;
  std::vector<Index> pilot_indices;
};

/// Thrown where an operation needs a converged solution and the solver
/// exhausted its iterations.
struct NoConvergence : Error {
  explicit NoConvergence(const std::string& msg) : Error(msg) {}
};

inline Index default_pilot_size(Index n, Index dim) {
  return std::min<Index>(n, std::max<Index>(500, 20 * dim));
}

/// Fits the pilot on explicit rows (equal-weight risk over the subset).
/// d rows of full rank are the bare minimum (exact interpolation); anything
/// smaller cannot produce an invertible pilot Hessian.
inline Pilot fit_pilot_at(const LossModel& model, const Dataset& data,
                          std::vector<Index> rows) {
  if (static_cast<Index>(rows.size()) < model.dim()) {
    throw Error("fit_pilot: need at least d pilot rows");
  }
  const Solution sol = newton_solve(SampleRisk::subset(model, data, rows),
                                    SolveSpec::zeros(model.dim()));
  if (!sol.converged) throw NoConvergence("fit_pilot: pilot solve did not converge");
  Pilot pilot;
  pilot.theta0 = sol.theta;
  pilot.sigma0 = sol.final_hess;
  pilot.n0 = static_cast<Index>(rows.size());
  pilot.pilot_indices = std::move(rows);
  if (!strict_spd_inverse(pilot.sigma0)) {
    throw SingularHessian("fit_pilot: pilot Hessian is not invertible");
  }
  return pilot;
}

inline Pilot fit_pilot(const LossModel& model, const Dataset& data, Index n0, Rng& rng) {
  if (n0 < model.dim()) throw Error("fit_pilot: need n0 >= d");
  std::vector<Index> rows(static_cast<std::size_t>(n0));
  for (auto& r : rows) {
    r = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(data.rows())));
  }
  return fit_pilot_at(model, data, std::move(rows));
}

namespace detail {

inline Eigen::VectorXd plan_scores_or_uniform(Eigen::VectorXd scores, double floor_beta,
                                              bool uniform_fallback, const char* what) {
  const double total = compensated_sum(scores);
  if (!(total > 0.0)) {
    if (!uniform_fallback) {
      throw DegeneratePlan(std::string(what) + ": all scores are zero");
    }
    scores.setOnes();
  }
  return apply_floor(scores, floor_beta);
}

}  // namespace detail

/// pi_i proportional to the gradient norm at the pilot solution.
inline SamplingPlan gradient_plan(const LossModel& model, const Dataset& data,
                                  const Pilot& pilot, double floor_beta,
                                  bool uniform_fallback = false) {
  const Eigen::VectorXd scales = model.grad_scales(data, pilot.theta0);
  const Eigen::VectorXd scores =
      scales.cwiseAbs().cwiseProduct(data.features().rowwise().norm());
  return SamplingPlan(detail::plan_scores_or_uniform(scores, floor_beta,
                                                     uniform_fallback, "gradient_plan"),
                      floor_beta);
}

/// pi_i proportional to the Newton-direction norm || sigma0^{-1} grad_i ||
/// at the pilot. One factorization of sigma0, reused for all rows; scale
/// invariant in the features.
inline SamplingPlan hessian_plan(const LossModel& model, const Dataset& data,
                                 const Pilot& pilot, double floor_beta,
                                 bool uniform_fallback = false) {
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(pilot.sigma0));
  if (llt.info() != Eigen::Success) {
    throw SingularHessian("hessian_plan: pilot Hessian factorization failed");
  }
  const Eigen::VectorXd scales = model.grad_scales(data, pilot.theta0);
  const Eigen::MatrixXd& x = data.features();
  const Index n = x.rows();
  Eigen::VectorXd scores(n);
  constexpr Index kBlock = 8192;
  for (Index start = 0; start < n; start += kBlock) {
    const Index len = std::min<Index>(kBlock, n - start);
    const Eigen::MatrixXd solved = llt.solve(x.middleRows(start, len).transpose());
    scores.segment(start, len) =
        solved.colwise().norm().transpose().cwiseProduct(
            scales.segment(start, len).cwiseAbs());
  }
  if (!scores.allFinite()) {
    throw SingularHessian("hessian_plan: scores are not finite");
  }
  return SamplingPlan(detail::plan_scores_or_uniform(scores, floor_beta,
                                                     uniform_fallback, "hessian_plan"),
                      floor_beta);
}

/// n independent categorical draws (with replacement) from the plan.
inline SampleDraw draw(const SamplingPlan& plan, Index n, Rng& rng) {
  if (n < 1) throw Error("draw: need n >= 1");
  SampleDraw d;
  d.plan_id = plan.id();
  d.indices.resize(static_cast<std::size_t>(n));
  d.pi_values.resize(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    const Index i = plan.table().sample(rng);
    d.indices[static_cast<std::size_t>(j)] = i;
    d.pi_values[static_cast<std::size_t>(j)] = plan.prob(i);
  }
  return d;
}

}  // namespace subopt
