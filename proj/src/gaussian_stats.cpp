#include "emofad/gaussian_stats.hpp"

#include <cmath>

#include "emofad/error.hpp"

namespace emofad {

StatsAccumulator::StatsAccumulator(Eigen::Index dim)
    : mean_(Eigen::VectorXd::Zero(dim)), comoment_(Eigen::MatrixXd::Zero(dim, dim)) {
  if (dim < 1) throw Error(ErrorCode::kDimensionMismatch, "accumulator dimension must be >= 1");
}

StatsAccumulator::StatsAccumulator(Eigen::Index count, Eigen::VectorXd mean, Eigen::MatrixXd comoment)
    : count_(count), mean_(std::move(mean)), comoment_(std::move(comoment)) {
  if (comoment_.rows() != mean_.size() || comoment_.cols() != mean_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "co-moment matrix does not match mean length");
  }
}

void StatsAccumulator::accumulate(std::span<const double> vector) {
  if (static_cast<Eigen::Index>(vector.size()) != dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "vector of length " + std::to_string(vector.size()) +
                                                   " for accumulator of dim " + std::to_string(dim()));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite entry in accumulated vector");
  }
  Eigen::Map<const Eigen::VectorXd> x(vector.data(), dim());
  ++count_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  const double scale = static_cast<double>(count_ - 1) / static_cast<double>(count_);
  comoment_.noalias() += scale * delta * delta.transpose();
}

StatsAccumulator merge(const StatsAccumulator& a, const StatsAccumulator& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "cannot merge accumulators of dim " + std::to_string(a.dim()) +
                                                   " and " + std::to_string(b.dim()));
  }
  if (b.count() == 0) return a;
  if (a.count() == 0) return b;
  const double na = static_cast<double>(a.count());
  const double nb = static_cast<double>(b.count());
  const double n = na + nb;
  // Written so that merge(a, b) and merge(b, a) are bit-identical.
  Eigen::VectorXd mean = (na * a.mean() + nb * b.mean()) / n;
  const Eigen::VectorXd delta = b.mean() - a.mean();
  Eigen::MatrixXd comoment = a.comoment() + b.comoment();
  comoment.noalias() += (na * nb / n) * delta * delta.transpose();
  return StatsAccumulator(a.count() + b.count(), std::move(mean), std::move(comoment));
}

GaussianStats finalize(const StatsAccumulator& acc, CovarianceMode mode, std::string encoder_id) {
  const Eigen::Index n = acc.count();
  if (mode == CovarianceMode::kSample && n < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                "sample covariance needs at least 2 vectors, got " + std::to_string(n));
  }
  if (n < 1) throw Error(ErrorCode::kInsufficientSamples, "no vectors accumulated");
  const double denom = mode == CovarianceMode::kSample ? static_cast<double>(n - 1) : static_cast<double>(n);
  GaussianStats stats;
  stats.encoder_id = std::move(encoder_id);
  stats.count = n;
  stats.mean = acc.mean();
  stats.cov = (acc.comoment() + acc.comoment().transpose()) / (2.0 * denom);
  return stats;
}

nlohmann::json to_json(const GaussianStats& stats) {
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index r = 0; r < stats.cov.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < stats.cov.cols(); ++c) row.push_back(stats.cov(r, c));
    cov.push_back(std::move(row));
  }
  nlohmann::json mean = nlohmann::json::array();
  for (Eigen::Index i = 0; i < stats.mean.size(); ++i) mean.push_back(stats.mean(i));
  return {{"encoder_id", stats.encoder_id},
          {"dim", stats.dim()},
          {"count", stats.count},
          {"mean", std::move(mean)},
          {"cov", std::move(cov)}};
}

GaussianStats stats_from_json(const nlohmann::json& j) {
  try {
    GaussianStats stats;
    stats.encoder_id = j.value("encoder_id", std::string{});
    const auto dim = j.at("dim").get<Eigen::Index>();
    stats.count = j.at("count").get<Eigen::Index>();
    const auto& mean = j.at("mean");
    const auto& cov = j.at("cov");
    if (dim < 1 || static_cast<Eigen::Index>(mean.size()) != dim || static_cast<Eigen::Index>(cov.size()) != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "stats JSON: mean/cov sizes disagree with dim");
    }
    stats.mean.resize(dim);
    stats.cov.resize(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      stats.mean(i) = mean.at(i).get<double>();
      const auto& row = cov.at(i);
      if (static_cast<Eigen::Index>(row.size()) != dim) {
        throw Error(ErrorCode::kDimensionMismatch, "stats JSON: covariance row " + std::to_string(i) + " has wrong length");
      }
      for (Eigen::Index k = 0; k < dim; ++k) stats.cov(i, k) = row.at(k).get<double>();
    }
    if (!stats.mean.allFinite() || !stats.cov.allFinite()) {
      throw Error(ErrorCode::kNonFinite, "stats JSON contains non-finite values");
    }
    return stats;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("stats JSON: ") + e.what());
  }
}

CovarianceMode parse_covariance_mode(const std::string& name) {
  if (name == "sample") return CovarianceMode::kSample;
  if (name == "population") return CovarianceMode::kPopulation;
  throw Error(ErrorCode::kInvalidArgument, "unknown covariance mode '" + name + "'");
}

}  // namespace emofad
