#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "emofad/embedding_io.hpp"
#include "emofad/emotion_partition.hpp"
#include "emofad/frechet.hpp"
#include "emofad/gaussian_stats.hpp"

namespace emofad {

/// Pairwise group FAD per encoder plus the cross-encoder mean.
struct FadReport {
  std::string dataset_id;
  std::vector<std::string> pairs;
  /// Sorted encoder ids that enter the aggregate.
  std::vector<std::string> encoders;
  std::map<std::string, std::map<std::string, FadScore>> per_encoder;
  std::map<std::string, double> aggregate;
  /// Some (encoder, pair) cell is missing.
  bool partial = false;
  /// Aggregate averages per-encoder min-max normalised values instead of raw ones.
  bool normalized = false;
};

struct PairwiseConfig {
  std::string dataset_id = "dataset";
  CovarianceMode covariance_mode = CovarianceMode::kSample;
  FrechetOptions frechet;
  int jobs = 1;
  bool normalize = false;
};

/// OpenMP over (encoder x group) statistics and (encoder x pair) distances.
/// Output is bit-identical for every `config.jobs`.
FadReport pairwise_fad(const GroupPartition& partition, const std::map<std::string, EmbeddingSet>& embeddings,
                       const PairwiseConfig& config);

/// Single-threaded reference for pairwise_fad.
FadReport pairwise_fad_serial(const GroupPartition& partition,
                              const std::map<std::string, EmbeddingSet>& embeddings, const PairwiseConfig& config);

/// Arithmetic mean, summed in key order.
double aggregate_encoders(const std::map<std::string, double>& scores);

enum class ReportFormat { kJson, kMarkdown, kCsv };
ReportFormat parse_report_format(const std::string& name);

nlohmann::json to_json(const FadReport& report);
FadReport report_from_json(const nlohmann::json& j);

std::string render_report(const FadReport& report, ReportFormat format);

/// Deviation of candidate sources from a reference, per pair.
struct ComparisonReport {
  struct Row {
    std::string source;
    std::map<std::string, double> aggregate;
    std::map<std::string, double> deviation;
    /// Mean absolute deviation from the reference across pairs; smaller is closer.
    double realism = 0.0;
  };
  std::vector<std::string> pairs;
  Row reference;
  std::vector<Row> candidates;
};

ComparisonReport compare_sources(const FadReport& reference, const std::vector<FadReport>& candidates);

nlohmann::json to_json(const ComparisonReport& report);
std::string render_comparison(const ComparisonReport& report, ReportFormat format);

/// Fixed two-decimal rendering used by the markdown tables ("8.69").
std::string format_fixed2(double value);

}  // namespace emofad
