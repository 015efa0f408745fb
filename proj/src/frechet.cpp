#include "emofad/frechet.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "emofad/error.hpp"

namespace emofad {

namespace {

struct SymmetricSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  double norm = 0.0;
};

SymmetricSpectrum symmetric_eigen(const Eigen::MatrixXd& m, double tol, bool want_vectors) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix is not square");
  }
  if (!m.allFinite()) throw Error(ErrorCode::kNonFinite, "matrix has non-finite entries");
  const double scale = m.norm();
  if ((m - m.transpose()).norm() > tol * std::max(scale, 1e-300)) {
    throw Error(ErrorCode::kNotSymmetric, "matrix is not symmetric within tolerance");
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      sym, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenFailure, "symmetric eigensolver did not converge");
  }
  SymmetricSpectrum out;
  out.values = solver.eigenvalues();
  if (want_vectors) out.vectors = solver.eigenvectors();
  out.norm = out.values.size() ? out.values.cwiseAbs().maxCoeff() : 0.0;
  if (out.values.size() && out.values.minCoeff() < -tol * out.norm) {
    throw Error(ErrorCode::kIndefiniteMatrix,
                "matrix has eigenvalue " + std::to_string(out.values.minCoeff()) + " below -tol*|M|_2");
  }
  return out;
}

double trace_sqrt_product(const Eigen::MatrixXd& cov_a, const Eigen::MatrixXd& cov_b, double tol,
                          double& min_eigenvalue) {
  const Eigen::MatrixXd root_a = matrix_sqrt_psd(cov_a, tol);
  Eigen::MatrixXd product = root_a * cov_b * root_a;
  product = 0.5 * (product + product.transpose().eval());
  auto spectrum = symmetric_eigen(product, tol, false);
  min_eigenvalue = spectrum.values.size() ? spectrum.values.minCoeff() : 0.0;
  return spectrum.values.cwiseMax(0.0).cwiseSqrt().sum();
}

void check_stats(const GaussianStats& s, const char* which) {
  if (s.mean.size() < 1 || s.cov.rows() != s.mean.size() || s.cov.cols() != s.mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch, std::string("statistics '") + which + "' have inconsistent shapes");
  }
}

}  // namespace

PsdSqrt matrix_sqrt_psd_detailed(const Eigen::MatrixXd& m, double tol) {
  auto spectrum = symmetric_eigen(m, tol, true);
  PsdSqrt out;
  out.min_eigenvalue = spectrum.values.size() ? spectrum.values.minCoeff() : 0.0;
  const Eigen::VectorXd roots = spectrum.values.cwiseMax(0.0).cwiseSqrt();
  out.root = spectrum.vectors * roots.asDiagonal() * spectrum.vectors.transpose();
  out.root = 0.5 * (out.root + out.root.transpose().eval());
  return out;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m, double tol) {
  return matrix_sqrt_psd_detailed(m, tol).root;
}

GaussianStats regularize(GaussianStats stats, double eps) {
  if (eps < 0.0) throw Error(ErrorCode::kInvalidArgument, "regularization eps must be >= 0");
  if (eps == 0.0 || stats.cov.size() == 0) return stats;
  const double shift = eps * stats.cov.diagonal().mean();
  stats.cov.diagonal().array() += shift;
  return stats;
}

FadScore frechet_distance(const GaussianStats& a, const GaussianStats& b, const FrechetOptions& options) {
  check_stats(a, "a");
  check_stats(b, "b");
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "cannot compare statistics of dim " + std::to_string(a.dim()) +
                                                   " and " + std::to_string(b.dim()));
  }

  FadScore score;
  score.encoder_id = !a.encoder_id.empty() ? a.encoder_id : b.encoder_id;

  double eps = options.eps;
  double trace_sqrt = 0.0;
  GaussianStats ra;
  GaussianStats rb;
  for (;;) {
    ra = regularize(a, eps);
    rb = regularize(b, eps);
    try {
      trace_sqrt = trace_sqrt_product(ra.cov, rb.cov, options.tol, score.min_eigenvalue_seen);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEigenFailure) throw;
      if (!options.allow_retry || eps >= options.retry_eps) {
        throw Error(ErrorCode::kSingularCovariance,
                    std::string("matrix square root failed and regularization is exhausted: ") + e.what());
      }
      eps = options.retry_eps;
      score.regularization_applied = true;
    }
  }

  const double mean_term = (ra.mean - rb.mean).squaredNorm();
  const double trace_a = ra.cov.trace();
  const double trace_b = rb.cov.trace();
  const double value = mean_term + trace_a + trace_b - 2.0 * trace_sqrt;
  const double clamp_floor = -1e-8 * std::max(1.0, trace_a + trace_b);
  if (value < clamp_floor) {
    throw Error(ErrorCode::kNegativeDistance, "Frechet distance evaluated to " + std::to_string(value));
  }
  if (value < 0.0) {
    score.value = 0.0;
    score.regularization_applied = true;
  } else {
    score.value = value;
  }
  return score;
}

}  // namespace emofad
