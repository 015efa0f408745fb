#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emofad/embedding_io.hpp"

namespace emofad {

enum class Quadrant { kQ1 = 0, kQ2 = 1, kQ3 = 2, kQ4 = 3 };

/// Two quadrant numberings of the valence-arousal plane.
///   emomusic: (-V,+A)=Q1, (-V,-A)=Q2, (+V,+A)=Q3, (+V,-A)=Q4
///   russell:  (+V,+A)=Q1, (-V,+A)=Q2, (-V,-A)=Q3, (+V,-A)=Q4
/// Zero counts as positive on both axes.
enum class QuadrantConvention { kEmomusic, kRussell };

enum class GroupBy { kVaQuadrant, kExplicitLabel };

std::string quadrant_name(Quadrant q);
Quadrant parse_quadrant(const std::string& name);
QuadrantConvention parse_convention(const std::string& name);
std::string convention_name(QuadrantConvention c);
GroupBy parse_group_by(const std::string& name);

Quadrant va_to_quadrant(double valence, double arousal, QuadrantConvention convention);

/// Sign (+1 or -1) of valence and arousal inside `q`.
std::pair<int, int> quadrant_signs(Quadrant q, QuadrantConvention convention);

struct GroupPartition {
  /// label -> clip ids, in manifest order within each group.
  std::map<std::string, std::vector<std::string>> groups;
  std::optional<QuadrantConvention> convention;
};

GroupPartition partition(const DatasetManifest& manifest, GroupBy by,
                         QuadrantConvention convention = QuadrantConvention::kEmomusic);

/// Every unordered pair once, lexicographic by (label_a, label_b).
std::vector<std::pair<std::string, std::string>> enumerate_pairs(const GroupPartition& partition);

/// "Q1_Q2"-style column name.
std::string pair_name(const std::pair<std::string, std::string>& pair);

}  // namespace emofad
