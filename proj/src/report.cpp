#include "emofad/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>

#include "emofad/error.hpp"
#include "emofad/kernels.hpp"

namespace emofad {

namespace {

// Everything pairwise_fad needs, resolved and validated before any parallel work.
struct PairwisePlan {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> group_labels;
  std::vector<std::string> encoders;
  std::vector<const EmbeddingSet*> sets;
  // rows[e][g]: row indices of group g inside encoder e's matrix.
  std::vector<std::vector<std::vector<Eigen::Index>>> rows;

  std::size_t group_index(const std::string& label) const {
    return static_cast<std::size_t>(std::lower_bound(group_labels.begin(), group_labels.end(), label) -
                                    group_labels.begin());
  }
};

PairwisePlan make_plan(const GroupPartition& partition, const std::map<std::string, EmbeddingSet>& embeddings) {
  PairwisePlan plan;
  plan.pairs = enumerate_pairs(partition);
  if (embeddings.empty()) throw Error(ErrorCode::kEmptyInput, "no encoders supplied");
  for (const auto& [label, clips] : partition.groups) {
    if (clips.size() < 2) {
      throw Error(ErrorCode::kGroupTooSmall,
                  "group '" + label + "' has " + std::to_string(clips.size()) + " clip(s); at least 2 are required");
    }
    plan.group_labels.push_back(label);
  }
  for (const auto& [encoder, set] : embeddings) {
    plan.encoders.push_back(encoder);
    plan.sets.push_back(&set);
    auto& per_group = plan.rows.emplace_back();
    for (const auto& [label, clips] : partition.groups) {
      auto& idx = per_group.emplace_back();
      idx.reserve(clips.size());
      for (const auto& clip : clips) {
        auto row = set.row_of(clip);
        if (!row) {
          throw Error(ErrorCode::kMissingEmbedding,
                      "clip '" + clip + "' has no embedding for encoder '" + encoder + "'");
        }
        idx.push_back(*row);
      }
    }
  }
  return plan;
}

GaussianStats group_stats(const PairwisePlan& plan, std::size_t e, std::size_t g, const PairwiseConfig& config) {
  auto acc = kernels::accumulate_rows(plan.sets[e]->vectors(), plan.rows[e][g], 1);
  return finalize(acc, config.covariance_mode, plan.encoders[e]);
}

FadScore pair_score(const PairwisePlan& plan, const std::vector<GaussianStats>& stats, std::size_t e,
                    std::size_t p, const PairwiseConfig& config) {
  const std::size_t groups = plan.group_labels.size();
  const auto& [la, lb] = plan.pairs[p];
  auto score = frechet_distance(stats[e * groups + plan.group_index(la)], stats[e * groups + plan.group_index(lb)],
                                config.frechet);
  score.encoder_id = plan.encoders[e];
  return score;
}

void fill_aggregate(FadReport& report) {
  report.aggregate.clear();
  std::map<std::string, std::map<std::string, double>> values;
  for (const auto& encoder : report.encoders) {
    auto it = report.per_encoder.find(encoder);
    if (it == report.per_encoder.end()) continue;
    std::map<std::string, double> column;
    for (const auto& [pair, score] : it->second) column[pair] = score.value;
    if (report.normalized && !column.empty()) {
      auto [lo, hi] = std::minmax_element(column.begin(), column.end(),
                                          [](const auto& x, const auto& y) { return x.second < y.second; });
      const double min = lo->second;
      const double range = hi->second - lo->second;
      for (auto& [pair, v] : column) v = range > 0.0 ? (v - min) / range : 0.0;
    }
    values[encoder] = std::move(column);
  }
  for (const auto& pair : report.pairs) {
    std::map<std::string, double> by_encoder;
    for (const auto& [encoder, column] : values) {
      if (auto it = column.find(pair); it != column.end()) by_encoder[encoder] = it->second;
    }
    if (by_encoder.size() != report.encoders.size()) report.partial = true;
    if (!by_encoder.empty()) report.aggregate[pair] = aggregate_encoders(by_encoder);
  }
}

FadReport assemble(const PairwisePlan& plan, const std::vector<FadScore>& scores, const PairwiseConfig& config) {
  FadReport report;
  report.dataset_id = config.dataset_id;
  report.encoders = plan.encoders;
  report.normalized = config.normalize;
  for (const auto& pair : plan.pairs) report.pairs.push_back(pair_name(pair));
  const std::size_t n_pairs = plan.pairs.size();
  for (std::size_t e = 0; e < plan.encoders.size(); ++e) {
    auto& column = report.per_encoder[plan.encoders[e]];
    for (std::size_t p = 0; p < n_pairs; ++p) column[report.pairs[p]] = scores[e * n_pairs + p];
  }
  fill_aggregate(report);
  return report;
}

// Runs `body(i)` for i in [0, n) on `jobs` threads; rethrows the lowest-index failure.
template <typename Body>
void parallel_cells(std::size_t n, int jobs, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

nlohmann::json aggregate_json(const std::vector<std::string>& pairs, const std::map<std::string, double>& values) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& pair : pairs) {
    if (auto it = values.find(pair); it != values.end()) out[pair] = it->second;
  }
  return out;
}

std::string markdown_table(const std::vector<std::string>& pairs,
                           const std::vector<std::pair<std::string, const std::map<std::string, double>*>>& rows) {
  std::string out = "| Source |";
  for (const auto& p : pairs) out += " " + p + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < pairs.size(); ++i) out += "---:|";
  out += "\n";
  for (const auto& [source, values] : rows) {
    out += "| " + source + " |";
    for (const auto& p : pairs) {
      auto it = values->find(p);
      out += " " + (it == values->end() ? std::string("-") : format_fixed2(it->second)) + " |";
    }
    out += "\n";
  }
  return out;
}

std::string csv_number(double v) {
  return nlohmann::json(v).dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

FadReport pairwise_fad(const GroupPartition& partition, const std::map<std::string, EmbeddingSet>& embeddings,
                       const PairwiseConfig& config) {
  if (config.jobs < 1) throw Error(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  const auto plan = make_plan(partition, embeddings);
  const std::size_t n_enc = plan.encoders.size();
  const std::size_t n_groups = plan.group_labels.size();
  const std::size_t n_pairs = plan.pairs.size();

  std::vector<GaussianStats> stats(n_enc * n_groups);
  parallel_cells(stats.size(), config.jobs,
                 [&](std::size_t i) { stats[i] = group_stats(plan, i / n_groups, i % n_groups, config); });

  std::vector<FadScore> scores(n_enc * n_pairs);
  parallel_cells(scores.size(), config.jobs,
                 [&](std::size_t i) { scores[i] = pair_score(plan, stats, i / n_pairs, i % n_pairs, config); });

  return assemble(plan, scores, config);
}

FadReport pairwise_fad_serial(const GroupPartition& partition, const std::map<std::string, EmbeddingSet>& embeddings,
                              const PairwiseConfig& config) {
  const auto plan = make_plan(partition, embeddings);
  const std::size_t n_groups = plan.group_labels.size();
  std::vector<GaussianStats> stats;
  for (std::size_t e = 0; e < plan.encoders.size(); ++e) {
    for (std::size_t g = 0; g < n_groups; ++g) stats.push_back(group_stats(plan, e, g, config));
  }
  std::vector<FadScore> scores;
  for (std::size_t e = 0; e < plan.encoders.size(); ++e) {
    for (std::size_t p = 0; p < plan.pairs.size(); ++p) scores.push_back(pair_score(plan, stats, e, p, config));
  }
  return assemble(plan, scores, config);
}

double aggregate_encoders(const std::map<std::string, double>& scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "cannot aggregate zero encoders");
  double sum = 0.0;
  for (const auto& [encoder, value] : scores) sum += value;
  return sum / static_cast<double>(scores.size());
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  throw Error(ErrorCode::kInvalidArgument, "unknown output format '" + name + "'");
}

nlohmann::json to_json(const FadReport& report) {
  nlohmann::json per_encoder = nlohmann::json::object();
  for (const auto& [encoder, cells] : report.per_encoder) {
    nlohmann::json column = nlohmann::json::object();
    for (const auto& [pair, score] : cells) {
      column[pair] = {{"value", score.value}, {"regularized", score.regularization_applied}};
    }
    per_encoder[encoder] = std::move(column);
  }
  nlohmann::json j = {{"dataset", report.dataset_id},
                      {"pairs", report.pairs},
                      {"encoders", report.encoders},
                      {"per_encoder", std::move(per_encoder)},
                      {"aggregate", aggregate_json(report.pairs, report.aggregate)}};
  if (report.partial) j["partial"] = true;
  if (report.normalized) j["normalized"] = true;
  return j;
}

FadReport report_from_json(const nlohmann::json& j) {
  try {
    FadReport report;
    report.dataset_id = j.at("dataset").get<std::string>();
    report.pairs = j.at("pairs").get<std::vector<std::string>>();
    report.encoders = j.value("encoders", std::vector<std::string>{});
    report.normalized = j.value("normalized", false);
    if (j.contains("per_encoder")) {
      for (const auto& [encoder, cells] : j.at("per_encoder").items()) {
        auto& column = report.per_encoder[encoder];
        for (const auto& [pair, cell] : cells.items()) {
          FadScore score;
          score.encoder_id = encoder;
          score.value = cell.at("value").get<double>();
          score.regularization_applied = cell.value("regularized", false);
          column[pair] = score;
        }
      }
    }
    if (j.contains("aggregate")) {
      for (const auto& [pair, value] : j.at("aggregate").items()) report.aggregate[pair] = value.get<double>();
      report.partial = j.value("partial", false);
      for (const auto& encoder : report.encoders) {
        auto it = report.per_encoder.find(encoder);
        for (const auto& pair : report.pairs) {
          if (it == report.per_encoder.end() || !it->second.contains(pair)) report.partial = true;
        }
      }
    } else {
      fill_aggregate(report);
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("report JSON: ") + e.what());
  }
}

std::string format_fixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::string render_report(const FadReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return to_json(report).dump(2) + "\n";
    case ReportFormat::kMarkdown:
      return markdown_table(report.pairs, {{report.dataset_id, &report.aggregate}});
    case ReportFormat::kCsv: {
      std::string out = "row";
      for (const auto& p : report.pairs) out += "," + csv_field(p);
      out += "\n";
      for (const auto& encoder : report.encoders) {
        out += csv_field(encoder);
        auto it = report.per_encoder.find(encoder);
        for (const auto& p : report.pairs) {
          out += ",";
          if (it == report.per_encoder.end()) continue;
          if (auto cell = it->second.find(p); cell != it->second.end()) out += csv_number(cell->second.value);
        }
        out += "\n";
      }
      out += "aggregate";
      for (const auto& p : report.pairs) {
        out += ",";
        if (auto it = report.aggregate.find(p); it != report.aggregate.end()) out += csv_number(it->second);
      }
      return out + "\n";
    }
  }
  return {};
}

ComparisonReport compare_sources(const FadReport& reference, const std::vector<FadReport>& candidates) {
  ComparisonReport out;
  out.pairs = reference.pairs;
  out.reference.source = reference.dataset_id;
  out.reference.aggregate = reference.aggregate;
  for (const auto& pair : out.pairs) {
    if (!reference.aggregate.contains(pair)) {
      throw Error(ErrorCode::kPairSetMismatch, "reference '" + reference.dataset_id + "' lacks pair " + pair);
    }
    out.reference.deviation[pair] = 0.0;
  }
  for (const auto& cand : candidates) {
    if (cand.pairs != reference.pairs) {
      throw Error(ErrorCode::kPairSetMismatch,
                  "candidate '" + cand.dataset_id + "' has a different pair set than '" + reference.dataset_id + "'");
    }
    ComparisonReport::Row row;
    row.source = cand.dataset_id;
    row.aggregate = cand.aggregate;
    double total = 0.0;
    for (const auto& pair : out.pairs) {
      auto it = cand.aggregate.find(pair);
      if (it == cand.aggregate.end()) {
        throw Error(ErrorCode::kPairSetMismatch, "candidate '" + cand.dataset_id + "' lacks pair " + pair);
      }
      const double dev = std::abs(it->second - reference.aggregate.at(pair));
      row.deviation[pair] = dev;
      total += dev;
    }
    row.realism = out.pairs.empty() ? 0.0 : total / static_cast<double>(out.pairs.size());
    out.candidates.push_back(std::move(row));
  }
  return out;
}

nlohmann::json to_json(const ComparisonReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  auto row_json = [&](const ComparisonReport::Row& row) {
    return nlohmann::json{{"source", row.source},
                          {"aggregate", aggregate_json(report.pairs, row.aggregate)},
                          {"deviation", aggregate_json(report.pairs, row.deviation)},
                          {"realism", row.realism}};
  };
  for (const auto& c : report.candidates) rows.push_back(row_json(c));
  return {{"pairs", report.pairs}, {"reference", row_json(report.reference)}, {"candidates", std::move(rows)}};
}

std::string render_comparison(const ComparisonReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson:
      return to_json(report).dump(2) + "\n";
    case ReportFormat::kMarkdown: {
      std::vector<std::pair<std::string, const std::map<std::string, double>*>> rows;
      rows.emplace_back(report.reference.source, &report.reference.aggregate);
      for (const auto& c : report.candidates) rows.emplace_back(c.source, &c.aggregate);
      return markdown_table(report.pairs, rows);
    }
    case ReportFormat::kCsv: {
      std::string out = "source";
      for (const auto& p : report.pairs) out += "," + csv_field(p);
      out += ",mean_abs_deviation\n";
      auto emit = [&](const ComparisonReport::Row& row) {
        out += csv_field(row.source);
        for (const auto& p : report.pairs) out += "," + csv_number(row.aggregate.at(p));
        out += "," + csv_number(row.realism) + "\n";
      };
      emit(report.reference);
      for (const auto& c : report.candidates) emit(c);
      return out;
    }
  }
  return {};
}

}  // namespace emofad
