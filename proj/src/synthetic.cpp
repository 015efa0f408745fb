#include "emofad/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "emofad/error.hpp"
#include "emofad/frechet.hpp"
#include "emofad/kernels.hpp"

namespace emofad {

namespace oracle {

Eigensystem jacobi_eigen(const Eigen::MatrixXd& symmetric, int max_sweeps) {
  const Eigen::Index n = symmetric.rows();
  Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  Eigensystem out;
  out.vectors = Eigen::MatrixXd::Identity(n, n);
  const double scale = a.squaredNorm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    out.sweeps = sweep;
    if (off <= 1e-32 * scale || off == 0.0) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = out.vectors(k, p);
          const double vkq = out.vectors(k, q);
          out.vectors(k, p) = c * vkp - s * vkq;
          out.vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  out.values = a.diagonal();
  return out;
}

}  // namespace oracle

namespace {

bool is_diagonal(const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (r != c && m(r, c) != 0.0) return false;
  return true;
}

void check_spec(const GaussianSpec& s) {
  const Eigen::Index d = s.mean.size();
  if (d < 1 || s.cov.rows() != d || s.cov.cols() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "Gaussian spec mean/cov sizes disagree");
  }
  if (!s.mean.allFinite() || !s.cov.allFinite()) throw Error(ErrorCode::kNonFinite, "Gaussian spec is not finite");
  if ((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, s.cov.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kNotPsd, "Gaussian spec covariance is not symmetric");
  }
}

// Symmetric square root through the Jacobi eigensystem, negatives clamped.
Eigen::MatrixXd jacobi_sqrt(const Eigen::MatrixXd& m) {
  auto sys = oracle::jacobi_eigen(m);
  const Eigen::VectorXd roots = sys.values.cwiseMax(0.0).cwiseSqrt();
  return sys.vectors * roots.asDiagonal() * sys.vectors.transpose();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

GaussianSpec GaussianSpec::diagonal(Eigen::VectorXd mean, const Eigen::VectorXd& variances, std::uint64_t seed) {
  GaussianSpec s;
  s.mean = std::move(mean);
  s.cov = variances.asDiagonal();
  s.seed = seed;
  return s;
}

GaussianSpec GaussianSpec::isotropic(Eigen::VectorXd mean, double variance, std::uint64_t seed) {
  const auto d = mean.size();
  return diagonal(std::move(mean), Eigen::VectorXd::Constant(d, variance), seed);
}

EmbeddingSet sample(const GaussianSpec& spec, Eigen::Index n) {
  check_spec(spec);
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  const Eigen::Index d = spec.mean.size();

  Eigen::MatrixXd factor;
  if (is_diagonal(spec.cov)) {
    if (spec.cov.diagonal().minCoeff() < 0.0) throw Error(ErrorCode::kNotPsd, "negative variance in spec");
    factor = spec.cov.diagonal().cwiseSqrt().asDiagonal();
  } else {
    auto sys = oracle::jacobi_eigen(spec.cov);
    const double norm = sys.values.cwiseAbs().maxCoeff();
    if (sys.values.minCoeff() < -1e-10 * norm) {
      throw Error(ErrorCode::kNotPsd, "spec covariance has eigenvalue " + fmt(sys.values.minCoeff()));
    }
    factor = sys.vectors * sys.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix out(n, d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) z(k) = normal(rng);
    out.row(i) = (spec.mean + factor * z).transpose();
  }
  return EmbeddingSet("synthetic:seed=" + std::to_string(spec.seed), std::move(out));
}

double closed_form_fad(const GaussianSpec& a, const GaussianSpec& b) {
  check_spec(a);
  check_spec(b);
  if (a.mean.size() != b.mean.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "specs have different dimensions");
  }
  if (is_diagonal(a.cov) && is_diagonal(b.cov)) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.mean.size(); ++i) {
      const double dm = a.mean(i) - b.mean(i);
      const double sa = a.cov(i, i);
      const double sb = b.cov(i, i);
      total += dm * dm + sa + sb - 2.0 * std::sqrt(sa * sb);
    }
    return total;
  }
  const Eigen::MatrixXd root_a = jacobi_sqrt(a.cov);
  const Eigen::MatrixXd product = root_a * b.cov * root_a;
  const auto sys = oracle::jacobi_eigen(product);
  const double trace_sqrt = sys.values.cwiseMax(0.0).cwiseSqrt().sum();
  return (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * trace_sqrt;
}

std::vector<ConvergenceRow> convergence_probe(const GaussianSpec& a, const GaussianSpec& b,
                                              const std::vector<Eigen::Index>& n_grid, int jobs) {
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] < n_grid[i - 1]) throw Error(ErrorCode::kInvalidArgument, "n_grid must be ascending");
  }
  const double closed = closed_form_fad(a, b);
  std::vector<ConvergenceRow> rows;
  for (auto n : n_grid) {
    const auto sa = sample(a, n);
    const auto sb = sample(b, n);
    const auto stats_a = finalize(kernels::accumulate_rows(sa.vectors(), jobs));
    const auto stats_b = finalize(kernels::accumulate_rows(sb.vectors(), jobs));
    ConvergenceRow row;
    row.n = n;
    row.closed_form = closed;
    row.sampled = frechet_distance(stats_a, stats_b).value;
    const double err = std::abs(row.sampled - closed);
    row.relative_error = closed != 0.0 ? err / std::abs(closed) : err;
    rows.push_back(row);
  }
  return rows;
}

std::vector<SynthCheck> run_synth_checks(std::uint64_t seed, int jobs) {
  std::vector<SynthCheck> checks;
  auto add = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };
  auto guarded = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::string("threw: ") + e.what());
    }
  };

  guarded("self-distance", [&] {
    const auto spec = GaussianSpec::isotropic(Eigen::VectorXd::Zero(16), 1.0, seed);
    const auto s = finalize(kernels::accumulate_rows(sample(spec, 500).vectors(), jobs));
    const double v = frechet_distance(s, s).value;
    add("self-distance", v <= 1e-8, "F(X,X) = " + fmt(v));
  });

  guarded("closed-form agreement (diagonal, d=8, n=100000)", [&] {
    Eigen::VectorXd var_a(8), var_b(8);
    for (int i = 0; i < 8; ++i) {
      var_a(i) = 0.25 * (i + 1);
      var_b(i) = 0.25 * (8 - i);
    }
    const auto a = GaussianSpec::diagonal(Eigen::VectorXd::Zero(8), var_a, seed);
    const auto b = GaussianSpec::diagonal(Eigen::VectorXd::Ones(8), var_b, seed + 1);
    const auto rows = convergence_probe(a, b, {100000}, jobs);
    add("closed-form agreement (diagonal, d=8, n=100000)", rows.back().relative_error <= 0.02,
        "sampled " + fmt(rows.back().sampled) + " vs closed " + fmt(rows.back().closed_form));
  });

  guarded("mean separation (d=4, delta=2)", [&] {
    const auto a = GaussianSpec::isotropic(Eigen::VectorXd::Zero(4), 1.0, seed);
    const auto b = GaussianSpec::isotropic(Eigen::VectorXd::Constant(4, 2.0), 1.0, seed + 1);
    const auto rows = convergence_probe(a, b, {50000}, jobs);
    add("mean separation (d=4, delta=2)", rows.back().relative_error <= 0.03,
        "sampled " + fmt(rows.back().sampled) + " vs 16");
  });

  guarded("general PSD: core vs Jacobi oracle (d=12)", [&] {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd ma(12, 12), mb(12, 12);
    for (Eigen::Index i = 0; i < ma.size(); ++i) ma.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < mb.size(); ++i) mb.data()[i] = normal(rng);
    GaussianSpec a{Eigen::VectorXd::Zero(12), ma.transpose() * ma / 12.0, seed};
    GaussianSpec b{Eigen::VectorXd::Constant(12, 0.5), mb.transpose() * mb / 12.0, seed + 1};
    a.cov = 0.5 * (a.cov + a.cov.transpose().eval());
    b.cov = 0.5 * (b.cov + b.cov.transpose().eval());
    GaussianStats sa{"", 2, a.mean, a.cov};
    GaussianStats sb{"", 2, b.mean, b.cov};
    const double core = frechet_distance(sa, sb).value;
    const double ref = closed_form_fad(a, b);
    add("general PSD: core vs Jacobi oracle (d=12)", std::abs(core - ref) <= 1e-9 * std::max(1.0, ref),
        "core " + fmt(core) + " vs oracle " + fmt(ref));
  });

  guarded("sqrtm contract (d=64)", [&] {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(64, 64);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    Eigen::MatrixXd m = a.transpose() * a;
    m = 0.5 * (m + m.transpose().eval());
    const auto s = matrix_sqrt_psd(m);
    const double err = (s * s - m).norm() / m.norm();
    add("sqrtm contract (d=64)", err <= 1e-8, "relative error " + fmt(err));
  });

  return checks;
}

}  // namespace emofad
