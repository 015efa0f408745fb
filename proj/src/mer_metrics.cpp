#include "emofad/mer_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "emofad/error.hpp"

namespace emofad {

namespace {

void check_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": lengths differ (" + std::to_string(a) +
                                                   " vs " + std::to_string(b) + ")");
  }
}

void check_labels(std::span<const int> t, std::span<const int> p) {
  check_same_length(t.size(), p.size(), "labels");
  if (t.empty()) throw Error(ErrorCode::kEmptyInput, "no labels to score");
}

// Logits for all rows: X W_x^T + b.
Eigen::MatrixXd logits(const RowMatrix& x, const Eigen::MatrixXd& weights) {
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd z = x * weights.leftCols(d).transpose();
  z.rowwise() += weights.col(d).transpose();
  return z;
}

}  // namespace

double r_squared(std::span<const double> targets, std::span<const double> predictions) {
  check_same_length(targets.size(), predictions.size(), "r_squared");
  if (targets.size() < 2) throw Error(ErrorCode::kInsufficientSamples, "r_squared needs n >= 2");
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!std::isfinite(targets[i]) || !std::isfinite(predictions[i])) {
      throw Error(ErrorCode::kNonFinite, "r_squared input is not finite");
    }
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
    ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
  }
  if (ss_tot == 0.0) throw Error(ErrorCode::kZeroVariance, "targets have zero variance");
  return 1.0 - ss_res / ss_tot;
}

double accuracy(std::span<const int> true_labels, std::span<const int> predicted_labels, AccuracyMode mode) {
  check_labels(true_labels, predicted_labels);
  if (mode == AccuracyMode::kWeighted) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < true_labels.size(); ++i) correct += true_labels[i] == predicted_labels[i];
    return static_cast<double>(correct) / static_cast<double>(true_labels.size());
  }
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // class -> (hits, support)
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    auto& [hits, support] = per_class[true_labels[i]];
    ++support;
    hits += true_labels[i] == predicted_labels[i];
  }
  double sum = 0.0;
  for (const auto& [cls, hs] : per_class) sum += static_cast<double>(hs.first) / static_cast<double>(hs.second);
  return sum / static_cast<double>(per_class.size());
}

double macro_f1(std::span<const int> true_labels, std::span<const int> predicted_labels) {
  check_labels(true_labels, predicted_labels);
  std::set<int> classes(true_labels.begin(), true_labels.end());
  classes.insert(predicted_labels.begin(), predicted_labels.end());
  double sum = 0.0;
  for (int cls : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
      const bool t = true_labels[i] == cls;
      const bool p = predicted_labels[i] == cls;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
    }
    // 2PR/(P+R) == 2TP/(2TP+FP+FN), which is 0/0 only when the class never occurs.
    const double denom = static_cast<double>(2 * tp + fp + fn);
    sum += denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  }
  return sum / static_cast<double>(classes.size());
}

Eigen::VectorXd train_ridge_probe(const RowMatrix& x, std::span<const double> y, double lambda) {
  check_same_length(static_cast<std::size_t>(x.rows()), y.size(), "ridge probe");
  if (x.rows() < 2) throw Error(ErrorCode::kInsufficientSamples, "ridge probe needs n >= 2");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "ridge lambda must be >= 0");
  const Eigen::Index d = x.cols();
  Eigen::Map<const Eigen::VectorXd> target(y.data(), static_cast<Eigen::Index>(y.size()));

  // Centering removes the bias from the penalised system.
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = target.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = target.array() - y_mean;

  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = xc.transpose() * yc;

  Eigen::VectorXd w;
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    qr.setThreshold(1e-12);
    if (qr.rank() < d) {
      throw Error(ErrorCode::kSingularSystem, "normal equations are rank deficient (rank " +
                                                  std::to_string(qr.rank()) + " < " + std::to_string(d) + ")");
    }
    w = qr.solve(rhs);
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::kSingularSystem, "ridge system factorisation failed");
    w = ldlt.solve(rhs);
  }
  Eigen::VectorXd out(d + 1);
  out.head(d) = w;
  out(d) = y_mean - x_mean.dot(w);
  return out;
}

Eigen::VectorXd predict_ridge(const RowMatrix& x, const Eigen::VectorXd& weights) {
  if (weights.size() != x.cols() + 1) throw Error(ErrorCode::kDimensionMismatch, "ridge weights do not match dim");
  Eigen::VectorXd pred = x * weights.head(x.cols());
  pred.array() += weights(x.cols());
  return pred;
}

SoftmaxLossGrad softmax_loss_and_gradient(const RowMatrix& x, std::span<const int> labels,
                                          const Eigen::MatrixXd& weights) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index k = weights.rows();
  if (weights.cols() != d + 1) throw Error(ErrorCode::kDimensionMismatch, "softmax weights do not match dim");
  check_same_length(static_cast<std::size_t>(n), labels.size(), "softmax probe");

  Eigen::MatrixXd z = logits(x, weights);
  SoftmaxLossGrad out;
  Eigen::MatrixXd residual(n, k);  // softmax(z) - onehot(y)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zmax = z.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (z.row(i).array() - zmax).exp();
    const double total = e.sum();
    residual.row(i) = e / total;
    out.loss += std::log(total) + zmax - z(i, labels[i]);
    residual(i, labels[i]) -= 1.0;
  }
  out.loss /= static_cast<double>(n);
  out.gradient.resize(k, d + 1);
  out.gradient.leftCols(d) = residual.transpose() * x / static_cast<double>(n);
  out.gradient.col(d) = residual.colwise().sum().transpose() / static_cast<double>(n);
  return out;
}

SoftmaxProbe train_softmax_probe(const RowMatrix& x, std::span<const int> labels, int epochs, double lr) {
  check_same_length(static_cast<std::size_t>(x.rows()), labels.size(), "softmax probe");
  if (labels.empty()) throw Error(ErrorCode::kDegenerateInput, "softmax probe needs at least one example");
  if (epochs < 0 || !(lr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "softmax probe needs epochs >= 0, lr > 0");
  const int max_label = *std::max_element(labels.begin(), labels.end());
  const int min_label = *std::min_element(labels.begin(), labels.end());
  if (min_label < 0) throw Error(ErrorCode::kDegenerateInput, "class ids must be >= 0");
  const std::set<int> present(labels.begin(), labels.end());
  const int k = max_label + 1;
  if (k < 2) throw Error(ErrorCode::kDegenerateInput, "softmax probe needs at least 2 classes");
  if (static_cast<int>(present.size()) != k) {
    throw Error(ErrorCode::kDegenerateInput, "every class 0.." + std::to_string(k - 1) + " must occur at least once");
  }

  SoftmaxProbe probe;
  probe.weights = Eigen::MatrixXd::Zero(k, x.cols() + 1);
  auto current = softmax_loss_and_gradient(x, labels, probe.weights);
  probe.loss_history.push_back(current.loss);
  double step = lr;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (;;) {
      Eigen::MatrixXd trial = probe.weights - step * current.gradient;
      auto next = softmax_loss_and_gradient(x, labels, trial);
      if (next.loss <= current.loss || step < 1e-12) {
        if (next.loss <= current.loss) {
          probe.weights = std::move(trial);
          current = std::move(next);
        }
        break;
      }
      step *= 0.5;
    }
    probe.loss_history.push_back(current.loss);
  }
  return probe;
}

std::vector<int> predict_softmax(const RowMatrix& x, const Eigen::MatrixXd& weights) {
  if (weights.cols() != x.cols() + 1) throw Error(ErrorCode::kDimensionMismatch, "softmax weights do not match dim");
  const Eigen::MatrixXd z = logits(x, weights);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    z.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> kfold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2 || static_cast<std::size_t>(folds) > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot split " + std::to_string(n) + " examples into " + std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  return fold;
}

}  // namespace emofad
