#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace subopt {

inline constexpr const char* kVersion = "0.1.0";

using Index = Eigen::Index;

/// Coefficient vector of the fitted model (length d).
using Theta = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Error types. Non-convergence of the solver is reported through
// Solution::converged, not an exception; everything here is a hard failure.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A symmetric matrix that must be invertible (a Hessian or a sandwich
/// bread) failed its factorization.
struct SingularHessian : Error {
  explicit SingularHessian(const std::string& msg) : Error(msg) {}
};

/// The Gram matrix X^T X is rank deficient (leverage scores undefined).
struct SingularGram : Error {
  explicit SingularGram(const std::string& msg) : Error(msg) {}
};

/// All raw sampling scores are zero; no probability plan can be formed.
struct DegeneratePlan : Error {
  explicit DegeneratePlan(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// ---------------------------------------------------------------------------
// Small numeric helpers shared across modules.
// ---------------------------------------------------------------------------

/// Neumaier compensated summation; keeps probability vectors summing to 1
/// within 1e-12 even for N ~ 1e6.
inline double compensated_sum(const double* values, Index count) {
  double sum = 0.0;
  double comp = 0.0;
  for (Index i = 0; i < count; ++i) {
    const double v = values[i];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

inline double compensated_sum(const Eigen::VectorXd& v) {
  return compensated_sum(v.data(), v.size());
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

/// Strict inverse of a symmetric positive definite matrix. Fails (returns
/// nullopt) when the matrix is numerically rank deficient instead of
/// regularizing, so callers can surface the event explicitly.
inline std::optional<Eigen::MatrixXd> strict_spd_inverse(
    const Eigen::MatrixXd& a, double rel_tol = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(a));
  if (es.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double max_ev = ev.cwiseAbs().maxCoeff();
  if (!std::isfinite(max_ev) || max_ev <= 0.0) return std::nullopt;
  if (ev.minCoeff() <= rel_tol * max_ev) return std::nullopt;
  Eigen::MatrixXd inv = es.eigenvectors() *
                        ev.cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose();
  return symmetrize(inv);
}

}  // namespace subopt
