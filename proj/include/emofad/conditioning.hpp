#pragma once

#include <filesystem>
#include <utility>

#include <Eigen/Core>
#include <json.hpp>

#include "emofad/embedding_io.hpp"
#include "emofad/emotion_partition.hpp"

namespace emofad {

/// Target emotion: quadrant anchor plus continuous valence/arousal.
struct EmotionCondition {
  Quadrant quadrant = Quadrant::kQ1;
  double valence = 0.0;
  double arousal = 0.0;
  /// Weight of the quadrant embedding in [0, 1].
  double wgt_q = 0.5;
};

/// Weights of the conditioning head. Row-vector convention throughout:
///   embd_q  = quadrant_table.row(q)                     (1 x h)
///   embd_va = [v a] * va_projection + va_bias           (1 x h)
///   Q = queries * attn_q, K = music * attn_k, V = music * attn_v
struct ConditioningWeights {
  Eigen::MatrixXd quadrant_table;  // 4 x h
  Eigen::MatrixXd va_projection;   // 2 x h
  Eigen::RowVectorXd va_bias;      // h
  Eigen::MatrixXd attn_q;          // h x d_k
  Eigen::MatrixXd attn_k;          // m_dim x d_k
  Eigen::MatrixXd attn_v;          // m_dim x d_v

  Eigen::Index hidden() const noexcept { return quadrant_table.cols(); }
  Eigen::Index key_dim() const noexcept { return attn_q.cols(); }
  Eigen::Index value_dim() const noexcept { return attn_v.cols(); }
  Eigen::Index music_dim() const noexcept { return attn_k.rows(); }

  /// Throws DimensionMismatch / NonFinite on inconsistent weights.
  void validate() const;
};

ConditioningWeights weights_from_json(const nlohmann::json& j);
ConditioningWeights load_conditioning_weights(const std::filesystem::path& path);
nlohmann::json to_json(const ConditioningWeights& w);

/// Reflects coordinates onto the quadrant's signs, then floors magnitudes at 0.05.
std::pair<double, double> clamp_to_quadrant(double valence, double arousal, Quadrant quadrant,
                                            QuadrantConvention convention);

/// Builds a condition whose (v, a) has been moved into `quadrant`.
EmotionCondition make_condition(Quadrant quadrant, double valence, double arousal, double wgt_q,
                                QuadrantConvention convention);

/// wgt_q * embd_q + (1 - wgt_q) * embd_va.
Eigen::RowVectorXd emotion_embedding(const EmotionCondition& cond, const ConditioningWeights& w);

/// Row-wise softmax with max subtraction.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

/// Attention weights softmax(Q K^T / sqrt(d_k)), one row per query.
Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& queries, const RowMatrix& music,
                                  const ConditioningWeights& w);

/// EM = softmax(Q K^T / sqrt(d_k)) V, with Q from `queries` (q x h) and K, V
/// from `music` (T x m_dim). Result is q x d_v.
Eigen::MatrixXd cross_attention(const Eigen::MatrixXd& queries, const RowMatrix& music,
                                const ConditioningWeights& w);

}  // namespace emofad
