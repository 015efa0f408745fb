#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "emofad/embedding_io.hpp"

namespace emofad {

/// 1 - SS_res / SS_tot. Throws ZeroVariance when all targets are equal.
double r_squared(std::span<const double> targets, std::span<const double> predictions);

enum class AccuracyMode {
  kWeighted,    ///< overall fraction correct
  kUnweighted,  ///< mean per-class recall over classes present in the true labels
};

double accuracy(std::span<const int> true_labels, std::span<const int> predicted_labels, AccuracyMode mode);

/// Macro-averaged F1 over the union of true and predicted classes.
/// Per-class F1 is 0 when its denominator is 0.
double macro_f1(std::span<const int> true_labels, std::span<const int> predicted_labels);

/// Ridge regression with an unpenalised bias. Returns d+1 weights, bias last.
Eigen::VectorXd train_ridge_probe(const RowMatrix& x, std::span<const double> y, double lambda);
Eigen::VectorXd predict_ridge(const RowMatrix& x, const Eigen::VectorXd& weights);

struct SoftmaxLossGrad {
  double loss = 0.0;
  Eigen::MatrixXd gradient;  // k x (d+1)
};

/// Mean multinomial cross-entropy of weights W (k x (d+1), bias column last).
SoftmaxLossGrad softmax_loss_and_gradient(const RowMatrix& x, std::span<const int> labels,
                                          const Eigen::MatrixXd& weights);

struct SoftmaxProbe {
  Eigen::MatrixXd weights;           // k x (d+1)
  std::vector<double> loss_history;  // loss before epoch 1, then after each epoch
};

/// Full-batch gradient descent from zero weights. Labels must cover 0..k-1
/// with k >= 2. The step is halved whenever it would increase the loss.
SoftmaxProbe train_softmax_probe(const RowMatrix& x, std::span<const int> labels, int epochs, double lr);
std::vector<int> predict_softmax(const RowMatrix& x, const Eigen::MatrixXd& weights);

/// Deterministic k-fold assignment: indices shuffled with a seeded mt19937_64,
/// then dealt round-robin. Returns the fold id of every example.
std::vector<int> kfold_assignment(std::size_t n, int folds, std::uint64_t seed);

}  // namespace emofad
