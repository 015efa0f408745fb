#include "emofad/emotion_partition.hpp"

#include <cmath>

#include "emofad/error.hpp"

namespace emofad {

std::string quadrant_name(Quadrant q) {
  return "Q" + std::to_string(static_cast<int>(q) + 1);
}

Quadrant parse_quadrant(const std::string& name) {
  if (name == "Q1") return Quadrant::kQ1;
  if (name == "Q2") return Quadrant::kQ2;
  if (name == "Q3") return Quadrant::kQ3;
  if (name == "Q4") return Quadrant::kQ4;
  throw Error(ErrorCode::kInvalidArgument, "unknown quadrant '" + name + "' (expected Q1..Q4)");
}

QuadrantConvention parse_convention(const std::string& name) {
  if (name == "emomusic") return QuadrantConvention::kEmomusic;
  if (name == "russell") return QuadrantConvention::kRussell;
  throw Error(ErrorCode::kInvalidArgument, "unknown quadrant convention '" + name + "'");
}

std::string convention_name(QuadrantConvention c) {
  return c == QuadrantConvention::kEmomusic ? "emomusic" : "russell";
}

GroupBy parse_group_by(const std::string& name) {
  if (name == "quadrant") return GroupBy::kVaQuadrant;
  if (name == "label") return GroupBy::kExplicitLabel;
  throw Error(ErrorCode::kInvalidArgument, "unknown grouping '" + name + "' (expected quadrant|label)");
}

Quadrant va_to_quadrant(double valence, double arousal, QuadrantConvention convention) {
  if (!std::isfinite(valence) || !std::isfinite(arousal)) {
    throw Error(ErrorCode::kNonFinite, "valence/arousal must be finite");
  }
  const bool pos_v = valence >= 0.0;
  const bool pos_a = arousal >= 0.0;
  if (convention == QuadrantConvention::kEmomusic) {
    if (!pos_v) return pos_a ? Quadrant::kQ1 : Quadrant::kQ2;
    return pos_a ? Quadrant::kQ3 : Quadrant::kQ4;
  }
  if (pos_v) return pos_a ? Quadrant::kQ1 : Quadrant::kQ4;
  return pos_a ? Quadrant::kQ2 : Quadrant::kQ3;
}

std::pair<int, int> quadrant_signs(Quadrant q, QuadrantConvention convention) {
  if (convention == QuadrantConvention::kEmomusic) {
    switch (q) {
      case Quadrant::kQ1: return {-1, +1};
      case Quadrant::kQ2: return {-1, -1};
      case Quadrant::kQ3: return {+1, +1};
      case Quadrant::kQ4: return {+1, -1};
    }
  }
  switch (q) {
    case Quadrant::kQ1: return {+1, +1};
    case Quadrant::kQ2: return {-1, +1};
    case Quadrant::kQ3: return {-1, -1};
    case Quadrant::kQ4: return {+1, -1};
  }
  return {+1, +1};
}

GroupPartition partition(const DatasetManifest& manifest, GroupBy by, QuadrantConvention convention) {
  GroupPartition out;
  std::vector<std::string> missing;
  for (const auto& rec : manifest.records) {
    if (by == GroupBy::kVaQuadrant) {
      if (!rec.has_va()) {
        missing.push_back(rec.clip_id);
        continue;
      }
      out.groups[quadrant_name(va_to_quadrant(*rec.valence, *rec.arousal, convention))].push_back(rec.clip_id);
    } else {
      if (!rec.label) {
        missing.push_back(rec.clip_id);
        continue;
      }
      out.groups[*rec.label].push_back(rec.clip_id);
    }
  }
  if (!missing.empty()) {
    std::string detail = by == GroupBy::kVaQuadrant ? "clips without valence/arousal:" : "clips without a label:";
    for (const auto& id : missing) detail += " " + id;
    throw Error(ErrorCode::kMissingLabel, detail);
  }
  if (by == GroupBy::kVaQuadrant) out.convention = convention;
  return out;
}

std::vector<std::pair<std::string, std::string>> enumerate_pairs(const GroupPartition& partition) {
  if (partition.groups.size() < 2) {
    throw Error(ErrorCode::kTooFewGroups,
                "need at least 2 groups to form pairs, got " + std::to_string(partition.groups.size()));
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (auto a = partition.groups.begin(); a != partition.groups.end(); ++a) {
    for (auto b = std::next(a); b != partition.groups.end(); ++b) pairs.emplace_back(a->first, b->first);
  }
  return pairs;
}

std::string pair_name(const std::pair<std::string, std::string>& pair) {
  return pair.first + "_" + pair.second;
}

}  // namespace emofad
