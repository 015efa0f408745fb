#pragma once

#include <string>

#include <Eigen/Core>

#include "emofad/gaussian_stats.hpp"

namespace emofad {

/// Frechet distance between two fitted Gaussians.
struct FadScore {
  double value = 0.0;
  std::string encoder_id;
  /// Set when the eps retry fired or a tiny negative result was clamped to 0.
  bool regularization_applied = false;
  /// Smallest eigenvalue of Sa^{1/2} Sb Sa^{1/2} before clamping.
  double min_eigenvalue_seen = 0.0;
};

struct FrechetOptions {
  /// Relative (to the spectral norm) tolerance for symmetry and negative eigenvalues.
  double tol = 1e-10;
  /// Ridge added to both covariances up front; see regularize().
  double eps = 0.0;
  /// Retry once at eps = retry_eps when the eigensolver fails.
  bool allow_retry = true;
  double retry_eps = 1e-10;
};

struct PsdSqrt {
  Eigen::MatrixXd root;
  double min_eigenvalue = 0.0;
};

/// Symmetric PSD square root S of M (S*S = M) via symmetric eigendecomposition.
/// Eigenvalues in [-tol*|M|_2, 0) are clamped to zero.
PsdSqrt matrix_sqrt_psd_detailed(const Eigen::MatrixXd& m, double tol = 1e-10);
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m, double tol = 1e-10);

/// ||mu_a - mu_b||^2 + tr(Sa) + tr(Sb) - 2 tr sqrt(Sa^{1/2} Sb Sa^{1/2}).
FadScore frechet_distance(const GaussianStats& a, const GaussianStats& b, const FrechetOptions& options = {});

/// cov += eps * mean(diag(cov)) * I.
GaussianStats regularize(GaussianStats stats, double eps);

}  // namespace emofad
