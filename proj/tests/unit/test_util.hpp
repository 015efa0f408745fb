#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Core>

#include "emofad/embedding_io.hpp"
#include "emofad/error.hpp"

namespace emofad::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("emofad-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline RowMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0,
                               double offset = 0.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = offset + scale * normal(rng);
  return m;
}

/// Random SPD matrix A^T A / d + ridge * I.
inline Eigen::MatrixXd random_spd(Eigen::Index d, std::mt19937_64& rng, double ridge = 0.0) {
  const Eigen::MatrixXd a = random_matrix(d, d, rng);
  Eigen::MatrixXd m = a.transpose() * a / static_cast<double>(d);
  m = 0.5 * (m + m.transpose().eval());
  m.diagonal().array() += ridge;
  return m;
}

inline double rel_fro(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected emofad::Error, nothing was thrown");
}

}  // namespace emofad::testing
