#include "emofad/conditioning.hpp"

#include <cmath>

#include "emofad/error.hpp"

namespace emofad {

namespace {

constexpr double kMagnitudeFloor = 0.05;

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* name) {
  const auto& rows = j.at(name);
  if (!rows.is_array() || rows.empty()) {
    throw Error(ErrorCode::kParse, std::string("weights: '") + name + "' must be a non-empty 2-D array");
  }
  const auto cols = rows.at(0).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows.at(r).size() != cols) {
      throw Error(ErrorCode::kDimensionMismatch, std::string("weights: '") + name + "' is ragged");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows.at(r).at(c).get<double>();
    }
  }
  return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void expect_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                                                   std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                                                   "x" + std::to_string(cols));
  }
}

double signed_floor(double x, int sign) {
  return static_cast<double>(sign) * std::max(std::abs(x), kMagnitudeFloor);
}

}  // namespace

void ConditioningWeights::validate() const {
  const Eigen::Index h = hidden();
  if (h < 1 || key_dim() < 1 || value_dim() < 1 || music_dim() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "conditioning dimensions h, d_k, d_v, m_dim must be >= 1");
  }
  expect_shape(quadrant_table, 4, h, "quadrant_table");
  expect_shape(va_projection, 2, h, "va_projection");
  if (va_bias.size() != h) throw Error(ErrorCode::kDimensionMismatch, "va_bias length differs from h");
  expect_shape(attn_q, h, key_dim(), "attn_q");
  expect_shape(attn_k, music_dim(), key_dim(), "attn_k");
  expect_shape(attn_v, music_dim(), value_dim(), "attn_v");
  if (!quadrant_table.allFinite() || !va_projection.allFinite() || !va_bias.allFinite() || !attn_q.allFinite() ||
      !attn_k.allFinite() || !attn_v.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "conditioning weights contain non-finite values");
  }
}

ConditioningWeights weights_from_json(const nlohmann::json& j) {
  try {
    ConditioningWeights w;
    w.quadrant_table = matrix_from_json(j, "quadrant_table");
    w.va_projection = matrix_from_json(j, "va_projection");
    const auto bias = j.at("va_bias").get<std::vector<double>>();
    w.va_bias = Eigen::Map<const Eigen::RowVectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    w.attn_q = matrix_from_json(j, "attn_q");
    w.attn_k = matrix_from_json(j, "attn_k");
    w.attn_v = matrix_from_json(j, "attn_v");
    w.validate();
    const auto h = j.at("h").get<Eigen::Index>();
    const auto d_k = j.at("d_k").get<Eigen::Index>();
    const auto d_v = j.at("d_v").get<Eigen::Index>();
    const auto m_dim = j.at("m_dim").get<Eigen::Index>();
    if (h != w.hidden() || d_k != w.key_dim() || d_v != w.value_dim() || m_dim != w.music_dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "declared h/d_k/d_v/m_dim disagree with the matrices");
    }
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("weights JSON: ") + e.what());
  }
}

ConditioningWeights load_conditioning_weights(const std::filesystem::path& path) {
  try {
    return weights_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const ConditioningWeights& w) {
  std::vector<double> bias(w.va_bias.data(), w.va_bias.data() + w.va_bias.size());
  return {{"h", w.hidden()},
          {"d_k", w.key_dim()},
          {"d_v", w.value_dim()},
          {"m_dim", w.music_dim()},
          {"quadrant_table", matrix_to_json(w.quadrant_table)},
          {"va_projection", matrix_to_json(w.va_projection)},
          {"va_bias", bias},
          {"attn_q", matrix_to_json(w.attn_q)},
          {"attn_k", matrix_to_json(w.attn_k)},
          {"attn_v", matrix_to_json(w.attn_v)}};
}

std::pair<double, double> clamp_to_quadrant(double valence, double arousal, Quadrant quadrant,
                                            QuadrantConvention convention) {
  if (!std::isfinite(valence) || !std::isfinite(arousal)) {
    throw Error(ErrorCode::kNonFinite, "valence/arousal must be finite");
  }
  const auto [sv, sa] = quadrant_signs(quadrant, convention);
  return {signed_floor(valence, sv), signed_floor(arousal, sa)};
}

EmotionCondition make_condition(Quadrant quadrant, double valence, double arousal, double wgt_q,
                                QuadrantConvention convention) {
  auto [v, a] = clamp_to_quadrant(valence, arousal, quadrant, convention);
  return EmotionCondition{quadrant, v, a, wgt_q};
}

Eigen::RowVectorXd emotion_embedding(const EmotionCondition& cond, const ConditioningWeights& w) {
  if (!(cond.wgt_q >= 0.0 && cond.wgt_q <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "wgt_q must lie in [0, 1]");
  }
  if (!std::isfinite(cond.valence) || !std::isfinite(cond.arousal)) {
    throw Error(ErrorCode::kNonFinite, "valence/arousal must be finite");
  }
  if (w.quadrant_table.rows() != 4 || w.va_projection.rows() != 2 || w.va_projection.cols() != w.hidden() ||
      w.va_bias.size() != w.hidden()) {
    throw Error(ErrorCode::kDimensionMismatch, "conditioning weights have inconsistent hidden size");
  }
  const Eigen::RowVectorXd embd_q = w.quadrant_table.row(static_cast<Eigen::Index>(cond.quadrant));
  const Eigen::RowVectorXd embd_va =
      cond.valence * w.va_projection.row(0) + cond.arousal * w.va_projection.row(1) + w.va_bias;
  if (cond.wgt_q == 1.0) return embd_q;
  if (cond.wgt_q == 0.0) return embd_va;
  return cond.wgt_q * embd_q + (1.0 - cond.wgt_q) * embd_va;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Eigen::RowVectorXd e = (logits.row(r).array() - logits.row(r).maxCoeff()).exp();
    out.row(r) = e / e.sum();
  }
  return out;
}

Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& queries, const RowMatrix& music,
                                  const ConditioningWeights& w) {
  if (queries.cols() != w.attn_q.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "query width " + std::to_string(queries.cols()) +
                                                   " does not match attn_q rows " + std::to_string(w.attn_q.rows()));
  }
  if (music.rows() < 1 || music.cols() != w.attn_k.rows() || music.cols() != w.attn_v.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "music embedding must be T x m_dim with T >= 1, m_dim = " +
                                                   std::to_string(w.attn_k.rows()));
  }
  if (w.attn_k.cols() != w.attn_q.cols() || w.attn_q.cols() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "attn_q and attn_k must share d_k >= 1");
  }
  if (!queries.allFinite() || !music.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "attention inputs contain non-finite values");
  }
  const Eigen::MatrixXd q = queries * w.attn_q;
  const Eigen::MatrixXd k = music * w.attn_k;
  const Eigen::MatrixXd scores = (q * k.transpose()) / std::sqrt(static_cast<double>(w.attn_q.cols()));
  return softmax_rows(scores);
}

Eigen::MatrixXd cross_attention(const Eigen::MatrixXd& queries, const RowMatrix& music,
                                const ConditioningWeights& w) {
  const Eigen::MatrixXd weights = attention_weights(queries, music, w);
  // Per-token projection: equal tokens get bit-equal value rows.
  Eigen::MatrixXd v(music.rows(), w.attn_v.cols());
  for (Eigen::Index t = 0; t < music.rows(); ++t) v.row(t) = music.row(t) * w.attn_v;
  // Weights sum to 1, so each row is its heaviest token's value plus a weighted
  // sum of offsets from it; identical tokens then reproduce that value exactly.
  Eigen::MatrixXd out(weights.rows(), v.cols());
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    Eigen::Index anchor = 0;
    weights.row(r).maxCoeff(&anchor);
    const Eigen::RowVectorXd base = v.row(anchor);
    out.row(r) = base + weights.row(r) * (v.rowwise() - base);
  }
  return out;
}

}  // namespace emofad
