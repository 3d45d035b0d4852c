#pragma once

// Linear-Gaussian transition model x' = A x + B i + c + eps, eps ~ N(0, Sigma),
// over x = [inflation, unemployment, output_gap].

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <span>

#include "mpolicy/market_data.hpp"
#include "mpolicy/rng.hpp"

namespace mpolicy {

struct TransitionModel {
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  Eigen::Vector3d B = Eigen::Vector3d::Zero();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d cholesky_L = Eigen::Matrix3d::Zero();
  bool with_intercept = false;

  /// Builds a model and factors Sigma. Throws DomainError if Sigma is not
  /// symmetric or not positive semidefinite.
  static TransitionModel make(const Eigen::Matrix3d& A, const Eigen::Vector3d& B, const Eigen::Vector3d& c,
                              const Eigen::Matrix3d& sigma, bool with_intercept = false);

  Eigen::Vector3d mean_next(const Eigen::Vector3d& x, double rate) const { return A * x + B * rate + c; }
};

struct Transition {
  Eigen::Vector3d x;
  double rate = 0.0;
  Eigen::Vector3d x_next;
};

struct FitDiagnostics {
  std::size_t n_transitions = 0;
  Eigen::Vector3d per_equation_r2 = Eigen::Vector3d::Zero();
  Eigen::Vector3d residual_means = Eigen::Vector3d::Zero();
};

struct FitResult {
  TransitionModel model;
  FitDiagnostics diagnostics;
};

/// Lower-triangular L with L L^T = sigma, retrying with 1e-12 diagonal jitter.
/// An all-zero sigma factors to L = 0.
Eigen::Matrix3d shock_factor(const Eigen::Matrix3d& sigma);

std::vector<Transition> transitions_of(const StateSeries& history);

/// Least squares per equation on regressors [pi, u, y, i] (+1), solved by
/// column-pivoting Householder QR. Sigma uses the n - p denominator.
FitResult fit_ols(std::span<const Transition> data, bool with_intercept);
FitResult fit_ols(const StateSeries& history, bool with_intercept);

/// One draw of x' given the policy rate. Always consumes three normals.
Eigen::Vector3d step(const TransitionModel& model, const Eigen::Vector3d& x, double rate, Rng& rng);

void save_model(std::ostream& out, const TransitionModel& model);
TransitionModel load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const TransitionModel& model);
TransitionModel load_model(const std::filesystem::path& path);

void write_diagnostics(std::ostream& out, const FitDiagnostics& diag);

}  // namespace mpolicy
