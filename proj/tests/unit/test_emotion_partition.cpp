#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <random>
#include <set>

#include "emofad/emotion_partition.hpp"
#include "test_util.hpp"

using namespace emofad;
using emofad::testing::error_code_of;

TEST_CASE("va_to_quadrant: both conventions") {
  CHECK(va_to_quadrant(-0.5, 0.7, QuadrantConvention::kEmomusic) == Quadrant::kQ1);
  CHECK(va_to_quadrant(-0.5, -0.7, QuadrantConvention::kEmomusic) == Quadrant::kQ2);
  CHECK(va_to_quadrant(0.3, 0.9, QuadrantConvention::kEmomusic) == Quadrant::kQ3);
  CHECK(va_to_quadrant(0.3, -0.9, QuadrantConvention::kEmomusic) == Quadrant::kQ4);
  CHECK(va_to_quadrant(0.8, 0.8, QuadrantConvention::kRussell) == Quadrant::kQ1);
  CHECK(va_to_quadrant(-0.8, 0.8, QuadrantConvention::kRussell) == Quadrant::kQ2);
  CHECK(va_to_quadrant(-0.8, -0.8, QuadrantConvention::kRussell) == Quadrant::kQ3);
  CHECK(va_to_quadrant(0.8, -0.8, QuadrantConvention::kRussell) == Quadrant::kQ4);
}

TEST_CASE("va_to_quadrant: zero counts as positive; non-finite rejected") {
  CHECK(va_to_quadrant(0.0, 0.5, QuadrantConvention::kEmomusic) == Quadrant::kQ3);
  CHECK(va_to_quadrant(-0.2, 0.0, QuadrantConvention::kEmomusic) == Quadrant::kQ1);
  CHECK(va_to_quadrant(0.0, 0.0, QuadrantConvention::kRussell) == Quadrant::kQ1);
  CHECK(error_code_of([] {
          va_to_quadrant(std::numeric_limits<double>::quiet_NaN(), 0.1, QuadrantConvention::kRussell);
        }) == ErrorCode::kNonFinite);
}

TEST_CASE("quadrant_signs agrees with va_to_quadrant") {
  for (auto conv : {QuadrantConvention::kEmomusic, QuadrantConvention::kRussell}) {
    for (int q = 0; q < 4; ++q) {
      const auto quad = static_cast<Quadrant>(q);
      auto [sv, sa] = quadrant_signs(quad, conv);
      CHECK(va_to_quadrant(0.5 * sv, 0.5 * sa, conv) == quad);
    }
  }
}

TEST_CASE("partition by VA: one clip per sign cell gives four singleton groups") {
  auto m = parse_manifest(
      "clip_id,valence,arousal,label\n"
      "a,-0.5,0.5,\nb,-0.5,-0.5,\nc,0.5,0.5,\nd,0.5,-0.5,\n");
  auto p = partition(m, GroupBy::kVaQuadrant, QuadrantConvention::kEmomusic);
  REQUIRE(p.groups.size() == 4);
  CHECK(p.groups.at("Q1") == std::vector<std::string>{"a"});
  CHECK(p.groups.at("Q2") == std::vector<std::string>{"b"});
  CHECK(p.groups.at("Q3") == std::vector<std::string>{"c"});
  CHECK(p.groups.at("Q4") == std::vector<std::string>{"d"});
  CHECK(p.convention == QuadrantConvention::kEmomusic);
}

TEST_CASE("partition by label: five mood clusters") {
  auto m = parse_manifest(
      "clip_id,valence,arousal,label\n"
      "a,,,C1\nb,,,C2\nc,,,C3\nd,,,C4\ne,,,C5\nf,,,C1\n");
  auto p = partition(m, GroupBy::kExplicitLabel);
  CHECK(p.groups.size() == 5);
  CHECK(p.groups.at("C1") == std::vector<std::string>{"a", "f"});
  CHECK_FALSE(p.convention.has_value());
}

TEST_CASE("partition: missing labels are reported with clip ids") {
  auto m = parse_manifest("clip_id,valence,arousal,label\na,0.1,0.1,\nb,,,Q2\n");
  try {
    partition(m, GroupBy::kVaQuadrant);
    FAIL("expected MissingLabel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingLabel);
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  CHECK(error_code_of([&] { partition(m, GroupBy::kExplicitLabel); }) == ErrorCode::kMissingLabel);
}

TEST_CASE("enumerate_pairs: quadrant and mood-cluster column structure") {
  GroupPartition quads;
  for (auto q : {"Q3", "Q1", "Q4", "Q2"}) quads.groups[q] = {std::string(q) + "_clip"};
  std::vector<std::string> names;
  for (const auto& p : enumerate_pairs(quads)) names.push_back(pair_name(p));
  CHECK(names == std::vector<std::string>{"Q1_Q2", "Q1_Q3", "Q1_Q4", "Q2_Q3", "Q2_Q4", "Q3_Q4"});

  GroupPartition clusters;
  for (auto c : {"C1", "C2", "C3", "C4", "C5"}) clusters.groups[c] = {c};
  names.clear();
  for (const auto& p : enumerate_pairs(clusters)) names.push_back(pair_name(p));
  CHECK(names == std::vector<std::string>{"C1_C2", "C1_C3", "C1_C4", "C1_C5", "C2_C3", "C2_C4", "C2_C5", "C3_C4",
                                          "C3_C5", "C4_C5"});

  GroupPartition one;
  one.groups["Q1"] = {"x"};
  CHECK(error_code_of([&] { enumerate_pairs(one); }) == ErrorCode::kTooFewGroups);
}

TEST_CASE("property: k groups give k(k-1)/2 distinct pairs") {
  for (std::size_t k = 2; k <= 12; ++k) {
    GroupPartition p;
    for (std::size_t i = 0; i < k; ++i) p.groups["g" + std::to_string(100 + i)] = {"c"};
    const auto pairs = enumerate_pairs(p);
    CHECK(pairs.size() == k * (k - 1) / 2);
    std::set<std::string> uniq;
    for (const auto& pr : pairs) {
      CHECK(pr.first < pr.second);
      uniq.insert(pair_name(pr));
    }
    CHECK(uniq.size() == pairs.size());
  }
}

TEST_CASE("property: partition is total, disjoint, and convention-dual") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::string csv = "clip_id,valence,arousal,label\n";
  const int n = 300;
  for (int i = 0; i < n; ++i) {
    double v = u(rng), a = u(rng);
    if (v == 0.0) v = 0.5;
    if (a == 0.0) a = 0.5;
    csv += "c" + std::to_string(i) + "," + std::to_string(v) + "," + std::to_string(a) + ",\n";
  }
  const auto m = parse_manifest(csv);
  const auto emo = partition(m, GroupBy::kVaQuadrant, QuadrantConvention::kEmomusic);
  const auto rus = partition(m, GroupBy::kVaQuadrant, QuadrantConvention::kRussell);
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const auto& [label, clips] : emo.groups) {
    total += clips.size();
    seen.insert(clips.begin(), clips.end());
  }
  CHECK(total == static_cast<std::size_t>(n));
  CHECK(seen.size() == static_cast<std::size_t>(n));

  // Same cells, different names: each emomusic group equals exactly one russell group.
  std::set<std::vector<std::string>> emo_cells, rus_cells;
  for (const auto& [label, clips] : emo.groups) emo_cells.insert(clips);
  for (const auto& [label, clips] : rus.groups) rus_cells.insert(clips);
  CHECK(emo_cells == rus_cells);
}
