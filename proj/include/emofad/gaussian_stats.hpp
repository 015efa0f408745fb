#pragma once

#include <span>
#include <string>

#include <Eigen/Core>

#include <json.hpp>

namespace emofad {

enum class CovarianceMode { kSample, kPopulation };

/// Mean and covariance of one embedding set: the N(mu, Sigma) fed to the
/// Frechet distance.
struct GaussianStats {
  std::string encoder_id;
  Eigen::Index count = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  Eigen::Index dim() const noexcept { return mean.size(); }
};

/// Running mean and co-moment matrix (sum of outer products of centered
/// vectors). Single writer; combine shards with merge().
class StatsAccumulator {
 public:
  explicit StatsAccumulator(Eigen::Index dim);
  /// Reassembles an accumulator from its raw moments (used by block kernels).
  StatsAccumulator(Eigen::Index count, Eigen::VectorXd mean, Eigen::MatrixXd comoment);

  /// Welford update: delta = x - mean; mean += delta / n; C += (n-1)/n * delta delta^T.
  void accumulate(std::span<const double> vector);

  Eigen::Index dim() const noexcept { return mean_.size(); }
  Eigen::Index count() const noexcept { return count_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& comoment() const noexcept { return comoment_; }

 private:
  Eigen::Index count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd comoment_;
};

/// Pairwise (Chan et al.) combination: equals accumulating both streams in sequence.
StatsAccumulator merge(const StatsAccumulator& a, const StatsAccumulator& b);

GaussianStats finalize(const StatsAccumulator& acc, CovarianceMode mode = CovarianceMode::kSample,
                       std::string encoder_id = {});

nlohmann::json to_json(const GaussianStats& stats);
GaussianStats stats_from_json(const nlohmann::json& j);

CovarianceMode parse_covariance_mode(const std::string& name);

}  // namespace emofad
