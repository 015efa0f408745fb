#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "emofad/embedding_io.hpp"

namespace emofad {

/// N(mean, cov) with the seed that drives sample().
struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::uint64_t seed = 42;

  static GaussianSpec diagonal(Eigen::VectorXd mean, const Eigen::VectorXd& variances, std::uint64_t seed = 42);
  static GaussianSpec isotropic(Eigen::VectorXd mean, double variance = 1.0, std::uint64_t seed = 42);
};

/// n draws mean + L z with L L^T = cov (eigen factor) and z from
/// std::normal_distribution over mt19937_64(seed). The encoder id records the seed.
EmbeddingSet sample(const GaussianSpec& spec, Eigen::Index n);

/// Reference FAD between two specs, sharing no code with frechet_distance.
/// Diagonal pairs use the coordinate-wise formula; others go through
/// oracle::jacobi_eigen.
double closed_form_fad(const GaussianSpec& a, const GaussianSpec& b);

struct ConvergenceRow {
  Eigen::Index n = 0;
  double sampled = 0.0;
  double closed_form = 0.0;
  /// |sampled - closed| / closed, or the absolute error when closed == 0.
  double relative_error = 0.0;
};

std::vector<ConvergenceRow> convergence_probe(const GaussianSpec& a, const GaussianSpec& b,
                                              const std::vector<Eigen::Index>& n_grid, int jobs = 1);

struct SynthCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// The oracle suite behind `emofad synth-check`.
std::vector<SynthCheck> run_synth_checks(std::uint64_t seed, int jobs = 1);

namespace oracle {

struct Eigensystem {
  Eigen::VectorXd values;   // unsorted
  Eigen::MatrixXd vectors;  // columns
  int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix.
Eigensystem jacobi_eigen(const Eigen::MatrixXd& symmetric, int max_sweeps = 100);

}  // namespace oracle

}  // namespace emofad
