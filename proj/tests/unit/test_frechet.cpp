#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "emofad/frechet.hpp"
#include "test_util.hpp"

using namespace emofad;
using emofad::testing::error_code_of;
using emofad::testing::random_spd;
using emofad::testing::rel_fro;

namespace {

GaussianStats make(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  GaussianStats s;
  s.count = 100;
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  return s;
}

GaussianStats diag_stats(std::initializer_list<double> mean, std::initializer_list<double> var) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(mean.size()));
  Eigen::VectorXd v(static_cast<Eigen::Index>(var.size()));
  Eigen::Index i = 0;
  for (double x : mean) m(i++) = x;
  i = 0;
  for (double x : var) v(i++) = x;
  return make(m, v.asDiagonal());
}

// Coordinate-wise closed form for simultaneously diagonal covariances.
double diagonal_oracle(const GaussianStats& a, const GaussianStats& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    const double dm = a.mean(i) - b.mean(i);
    const double sa = std::sqrt(a.cov(i, i));
    const double sb = std::sqrt(b.cov(i, i));
    total += dm * dm + (sa - sb) * (sa - sb);
  }
  return total;
}

Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::mt19937_64& rng) {
  Eigen::MatrixXd a = emofad::testing::random_matrix(d, d, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ();
}

Eigen::VectorXd random_vector(Eigen::Index d, std::mt19937_64& rng) {
  return emofad::testing::random_matrix(d, 1, rng).col(0);
}

}  // namespace

TEST_CASE("matrix_sqrt_psd: identity and diagonal") {
  CHECK(rel_fro(matrix_sqrt_psd(Eigen::MatrixXd::Identity(4, 4)), Eigen::MatrixXd::Identity(4, 4)) <= 1e-15);
  Eigen::MatrixXd d = Eigen::Vector2d(4, 9).asDiagonal();
  Eigen::MatrixXd expected = Eigen::Vector2d(2, 3).asDiagonal();
  CHECK(rel_fro(matrix_sqrt_psd(d), expected) <= 1e-14);
}

TEST_CASE("property: sqrtm reconstructs random PSD matrices") {
  std::mt19937_64 rng(17);
  for (Eigen::Index d : {1, 2, 5, 32, 100}) {
    CAPTURE(d);
    const auto m = random_spd(d, rng);
    const auto s = matrix_sqrt_psd(m);
    CHECK(rel_fro(s * s, m) <= 1e-8);
    CHECK(s == s.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
  }
}

TEST_CASE("sqrtm: rank-deficient input is fine, asymmetric and indefinite are rejected") {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd a = emofad::testing::random_matrix(3, 10, rng);
  Eigen::MatrixXd m = a.transpose() * a;  // rank 3 of 10
  m = 0.5 * (m + m.transpose().eval());
  const auto res = matrix_sqrt_psd_detailed(m);
  CHECK(rel_fro(res.root * res.root, m) <= 1e-8);

  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
  asym(0, 1) = 0.5;
  CHECK(error_code_of([&] { matrix_sqrt_psd(asym); }) == ErrorCode::kNotSymmetric);
  Eigen::MatrixXd indefinite = Eigen::Vector2d(1.0, -0.5).asDiagonal();
  CHECK(error_code_of([&] { matrix_sqrt_psd(indefinite); }) == ErrorCode::kIndefiniteMatrix);
  Eigen::MatrixXd tiny_negative = Eigen::Vector2d(1.0, -1e-14).asDiagonal();
  CHECK(matrix_sqrt_psd(tiny_negative)(1, 1) == 0.0);
}

TEST_CASE("frechet_distance: closed-form scalar and diagonal cases") {
  CHECK(frechet_distance(diag_stats({0}, {1}), diag_stats({1}, {1})).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(frechet_distance(diag_stats({0}, {4}), diag_stats({0}, {1})).value == doctest::Approx(1.0).epsilon(1e-14));
  const auto a = diag_stats({0, 0}, {1, 4});
  const auto b = diag_stats({1, 1}, {4, 1});
  const double oracle = diagonal_oracle(a, b);
  CHECK(oracle == 4.0);
  CHECK(std::abs(frechet_distance(a, b).value - 4.0) <= 1e-12);
}

TEST_CASE("frechet_distance: self distance is zero") {
  std::mt19937_64 rng(8);
  for (Eigen::Index d : {1, 4, 16, 64}) {
    auto s = make(random_vector(d, rng), random_spd(d, rng, 0.1));
    const auto score = frechet_distance(s, s);
    CHECK(score.value <= 1e-8);
    CHECK(score.value >= 0.0);
  }
}

TEST_CASE("property: symmetry, rotation invariance, mean-shift law") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 12; ++trial) {
    const Eigen::Index d = 1 + (trial * 11) % 48;
    CAPTURE(d);
    auto a = make(random_vector(d, rng), random_spd(d, rng, 0.05));
    auto b = make(random_vector(d, rng), random_spd(d, rng, 0.05));
    const double fab = frechet_distance(a, b).value;
    const double fba = frechet_distance(b, a).value;
    CHECK(std::abs(fab - fba) <= 1e-6 * std::max(1.0, fab));
    CHECK(fab >= 0.0);

    const auto r = random_orthogonal(d, rng);
    auto ra = make(r * a.mean, r * a.cov * r.transpose());
    auto rb = make(r * b.mean, r * b.cov * r.transpose());
    ra.cov = 0.5 * (ra.cov + ra.cov.transpose().eval());
    rb.cov = 0.5 * (rb.cov + rb.cov.transpose().eval());
    CHECK(std::abs(frechet_distance(ra, rb).value - fab) <= 1e-7 * std::max(1.0, fab));

    const Eigen::VectorXd delta = random_vector(d, rng);
    auto shifted = a;
    shifted.mean += delta;
    const double expected_change = delta.squaredNorm() + 2.0 * delta.dot(a.mean - b.mean);
    CHECK(std::abs(frechet_distance(shifted, b).value - fab - expected_change) <= 1e-9 * std::max(1.0, fab));
  }
}

TEST_CASE("property: commuting covariances match the diagonal oracle") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> var(0.01, 5.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index d = 1 + trial * 3;
    Eigen::VectorXd va(d), vb(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      va(i) = var(rng);
      vb(i) = var(rng);
    }
    auto a = make(random_vector(d, rng), va.asDiagonal());
    auto b = make(random_vector(d, rng), vb.asDiagonal());
    CHECK(std::abs(frechet_distance(a, b).value - diagonal_oracle(a, b)) <= 1e-9 * std::max(1.0, diagonal_oracle(a, b)));
    // Same check after a shared rotation: still simultaneously diagonalizable.
    const auto r = random_orthogonal(d, rng);
    auto ra = make(a.mean, r * a.cov * r.transpose());
    auto rb = make(b.mean, r * b.cov * r.transpose());
    ra.cov = 0.5 * (ra.cov + ra.cov.transpose().eval());
    rb.cov = 0.5 * (rb.cov + rb.cov.transpose().eval());
    CHECK(std::abs(frechet_distance(ra, rb).value - diagonal_oracle(a, b)) <= 1e-9 * std::max(1.0, diagonal_oracle(a, b)));
  }
}

TEST_CASE("frechet_distance: rank-deficient covariances and dimension mismatch") {
  std::mt19937_64 rng(6);
  Eigen::MatrixXd x = emofad::testing::random_matrix(3, 8, rng);
  Eigen::MatrixXd low_rank = x.transpose() * x / 3.0;
  low_rank = 0.5 * (low_rank + low_rank.transpose().eval());
  auto a = make(Eigen::VectorXd::Zero(8), low_rank);
  auto score = frechet_distance(a, a);
  CHECK(score.value >= 0.0);
  CHECK(score.value <= 1e-6);
  CHECK(frechet_distance(a, make(Eigen::VectorXd::Ones(8), low_rank)).value == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(error_code_of([] { frechet_distance(diag_stats({0}, {1}), diag_stats({0, 0}, {1, 1})); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("regularize") {
  auto s = diag_stats({0, 0}, {1, 3});
  CHECK(regularize(s, 0.0).cov == s.cov);
  const auto r = regularize(s, 0.5);
  CHECK(r.cov == (Eigen::Matrix2d() << 2, 0, 0, 4).finished());
  CHECK(r.mean == s.mean);
  auto zero = diag_stats({0, 0}, {0, 0});
  CHECK(regularize(zero, 1e-6).cov.isZero(0.0));
  FrechetOptions opts;
  opts.eps = 0.5;
  // eps=0.5 adds half the mean diagonal: diag(1,3) -> diag(2,4), diag(4,1) -> diag(5.25,2.25)
  const double expected = std::pow(std::sqrt(2.0) - std::sqrt(5.25), 2) + std::pow(2.0 - 1.5, 2);
  CHECK(frechet_distance(s, diag_stats({0, 0}, {4, 1}), opts).value == doctest::Approx(expected).epsilon(1e-12));
}
