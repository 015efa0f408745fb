#include "emofad/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "emofad/conditioning.hpp"
#include "emofad/embedding_io.hpp"
#include "emofad/emotion_partition.hpp"
#include "emofad/error.hpp"
#include "emofad/frechet.hpp"
#include "emofad/gaussian_stats.hpp"
#include "emofad/kernels.hpp"
#include "emofad/mer_metrics.hpp"
#include "emofad/report.hpp"
#include "emofad/synthetic.hpp"

namespace emofad::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes atomically to `path`, or to `out` when no path was given.
void emit(const std::string& path, std::string_view bytes, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << bytes;
  } else {
    write_file_atomic(path, bytes);
  }
}

nlohmann::json parse_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

GaussianStats stats_for(const fs::path& path, CovarianceMode mode, int jobs) {
  if (path.extension() == ".json") return stats_from_json(parse_json_file(path));
  const auto set = load_embeddings(path, path.stem().string());
  return finalize(kernels::accumulate_rows(set.vectors(), jobs), mode, set.encoder_id());
}

std::map<std::string, EmbeddingSet> load_embeddings_dir(const fs::path& dir, const DatasetManifest& manifest) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".npy" || ext == ".csv")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::kEmptyInput, "no .npy or .csv embeddings in " + dir.string());
  std::map<std::string, EmbeddingSet> sets;
  for (const auto& file : files) {
    const auto encoder = file.stem().string();
    if (sets.contains(encoder)) {
      throw Error(ErrorCode::kDuplicateClipId, "two embedding files for encoder '" + encoder + "'");
    }
    sets.emplace(encoder, align_to_manifest(load_embeddings(file, encoder), manifest));
  }
  return sets;
}

struct StatsArgs {
  std::string embeddings, encoder, covariance = "sample", output;
  int jobs = 1;
};

struct FadArgs {
  std::string a, b, covariance = "sample", output;
  double eps = 0.0, tol = 1e-10;
  int jobs = 1;
};

struct PairwiseArgs {
  std::string manifest, embeddings_dir, group_by = "quadrant", convention = "emomusic", dataset,
      covariance = "sample", format = "json", output;
  double eps = 0.0, tol = 1e-10;
  int jobs = 1;
  bool normalize = false;
};

struct CompareArgs {
  std::string reference, format = "markdown", output;
  std::vector<std::string> candidates;
};

struct ProbeArgs {
  std::string manifest, embeddings, task, metric, convention = "emomusic", output;
  int folds = 5, epochs = 500, jobs = 1;
  std::uint64_t seed = 42;
  double lambda = 1.0, lr = 0.1;
};

struct ConditionArgs {
  std::string quadrant, weights, music, convention = "russell", output;
  double valence = 0.0, arousal = 0.0, wgt_q = 0.5;
};

struct SynthArgs {
  std::uint64_t seed = 42;
  int jobs = 1;
};

int cmd_stats(const StatsArgs& args, std::ostream& out) {
  const fs::path path(args.embeddings);
  const auto encoder = args.encoder.empty() ? path.stem().string() : args.encoder;
  const auto set = load_embeddings(path, encoder);
  const auto stats =
      finalize(kernels::accumulate_rows(set.vectors(), args.jobs), parse_covariance_mode(args.covariance), encoder);
  emit(args.output, to_json(stats).dump(2) + "\n", out);
  return 0;
}

int cmd_fad(const FadArgs& args, std::ostream& out) {
  const auto mode = parse_covariance_mode(args.covariance);
  const auto a = stats_for(args.a, mode, args.jobs);
  const auto b = stats_for(args.b, mode, args.jobs);
  FrechetOptions options;
  options.eps = args.eps;
  options.tol = args.tol;
  const auto score = frechet_distance(a, b, options);
  out << nlohmann::json(score.value).dump() << "\n";
  if (!args.output.empty()) {
    const nlohmann::json j = {{"value", score.value},
                              {"encoder_id", score.encoder_id},
                              {"regularized", score.regularization_applied},
                              {"min_eigenvalue_seen", score.min_eigenvalue_seen}};
    write_file_atomic(args.output, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_pairwise(const PairwiseArgs& args, std::ostream& out) {
  const auto manifest = load_manifest(args.manifest);
  const auto part = partition(manifest, parse_group_by(args.group_by), parse_convention(args.convention));
  const auto sets = load_embeddings_dir(args.embeddings_dir, manifest);
  PairwiseConfig config;
  config.dataset_id = args.dataset.empty() ? fs::path(args.manifest).stem().string() : args.dataset;
  config.covariance_mode = parse_covariance_mode(args.covariance);
  config.frechet.eps = args.eps;
  config.frechet.tol = args.tol;
  config.jobs = args.jobs;
  config.normalize = args.normalize;
  const auto report = pairwise_fad(part, sets, config);
  emit(args.output, render_report(report, parse_report_format(args.format)), out);
  return 0;
}

int cmd_compare(const CompareArgs& args, std::ostream& out) {
  const auto reference = report_from_json(parse_json_file(args.reference));
  std::vector<FadReport> candidates;
  for (const auto& c : args.candidates) candidates.push_back(report_from_json(parse_json_file(c)));
  const auto comparison = compare_sources(reference, candidates);
  emit(args.output, render_comparison(comparison, parse_report_format(args.format)), out);
  return 0;
}

RowMatrix standardize(const RowMatrix& x, const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& scale) {
  RowMatrix z = x.rowwise() - mean;
  for (Eigen::Index c = 0; c < z.cols(); ++c) z.col(c) /= scale(c);
  return z;
}

int cmd_probe(const ProbeArgs& args, std::ostream& out) {
  const bool regression = args.task == "valence" || args.task == "arousal";
  const bool classification = args.task == "quadrant" || args.task == "cluster";
  if (!regression && !classification) throw UsageError("--task must be valence|arousal|quadrant|cluster");
  if (regression && args.metric != "r2") throw UsageError("regression tasks support --metric r2 only");
  if (classification && args.metric != "wa" && args.metric != "ua" && args.metric != "f1") {
    throw UsageError("classification tasks support --metric wa|ua|f1");
  }

  const auto manifest = load_manifest(args.manifest);
  const fs::path emb_path(args.embeddings);
  const auto set = align_to_manifest(load_embeddings(emb_path, emb_path.stem().string()), manifest);
  const auto convention = parse_convention(args.convention);

  std::vector<std::string> ids;
  std::vector<double> targets;
  std::vector<std::string> label_names;
  for (const auto& rec : manifest.records) {
    if (regression) {
      if (!rec.has_va()) continue;
      ids.push_back(rec.clip_id);
      targets.push_back(args.task == "valence" ? *rec.valence : *rec.arousal);
    } else if (args.task == "quadrant") {
      if (rec.has_va()) {
        label_names.push_back(quadrant_name(va_to_quadrant(*rec.valence, *rec.arousal, convention)));
      } else if (rec.label) {
        label_names.push_back(quadrant_name(parse_quadrant(*rec.label)));
      } else {
        continue;
      }
      ids.push_back(rec.clip_id);
    } else {
      if (!rec.label) continue;
      ids.push_back(rec.clip_id);
      label_names.push_back(*rec.label);
    }
  }
  if (ids.size() < static_cast<std::size_t>(args.folds)) {
    throw Error(ErrorCode::kInsufficientSamples,
                "only " + std::to_string(ids.size()) + " eligible clips for " + std::to_string(args.folds) + " folds");
  }
  const auto x = select_rows(set, ids).vectors();
  const auto fold = kfold_assignment(ids.size(), args.folds, args.seed);

  std::vector<int> labels;
  std::vector<std::string> classes;
  if (classification) {
    std::set<std::string> uniq(label_names.begin(), label_names.end());
    classes.assign(uniq.begin(), uniq.end());
    for (const auto& name : label_names) {
      labels.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), name) - classes.begin()));
    }
  }

  std::vector<double> predictions(ids.size(), 0.0);
  std::vector<int> predicted_labels(ids.size(), 0);
  for (int f = 0; f < args.folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < ids.size(); ++i) (fold[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    RowMatrix x_train(static_cast<Eigen::Index>(train.size()), x.cols());
    RowMatrix x_test(static_cast<Eigen::Index>(test.size()), x.cols());
    for (std::size_t i = 0; i < train.size(); ++i) x_train.row(static_cast<Eigen::Index>(i)) = x.row(train[i]);
    for (std::size_t i = 0; i < test.size(); ++i) x_test.row(static_cast<Eigen::Index>(i)) = x.row(test[i]);
    const Eigen::RowVectorXd mean = x_train.colwise().mean();
    Eigen::RowVectorXd scale =
        ((x_train.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(train.size())).sqrt();
    for (Eigen::Index c = 0; c < scale.size(); ++c) {
      if (scale(c) <= 0.0) scale(c) = 1.0;
    }
    x_train = standardize(x_train, mean, scale);
    x_test = standardize(x_test, mean, scale);

    if (regression) {
      std::vector<double> y;
      for (auto i : train) y.push_back(targets[static_cast<std::size_t>(i)]);
      const auto w = train_ridge_probe(x_train, y, args.lambda);
      const auto pred = predict_ridge(x_test, w);
      for (std::size_t i = 0; i < test.size(); ++i) {
        predictions[static_cast<std::size_t>(test[i])] = pred(static_cast<Eigen::Index>(i));
      }
    } else {
      // Classes absent from this training fold are remapped out.
      std::set<int> present;
      for (auto i : train) present.insert(labels[static_cast<std::size_t>(i)]);
      std::vector<int> to_global(present.begin(), present.end());
      std::map<int, int> to_local;
      for (std::size_t k = 0; k < to_global.size(); ++k) to_local[to_global[k]] = static_cast<int>(k);
      std::vector<int> y;
      for (auto i : train) y.push_back(to_local.at(labels[static_cast<std::size_t>(i)]));
      if (to_global.size() < 2) {
        for (auto i : test) predicted_labels[static_cast<std::size_t>(i)] = to_global.front();
        continue;
      }
      const auto probe = train_softmax_probe(x_train, y, args.epochs, args.lr);
      const auto pred = predict_softmax(x_test, probe.weights);
      for (std::size_t i = 0; i < test.size(); ++i) {
        predicted_labels[static_cast<std::size_t>(test[i])] = to_global[static_cast<std::size_t>(pred[i])];
      }
    }
  }

  double value = 0.0;
  if (regression) {
    value = r_squared(targets, predictions);
  } else if (args.metric == "wa") {
    value = accuracy(labels, predicted_labels, AccuracyMode::kWeighted);
  } else if (args.metric == "ua") {
    value = accuracy(labels, predicted_labels, AccuracyMode::kUnweighted);
  } else {
    value = macro_f1(labels, predicted_labels);
  }
  nlohmann::json j = {{"task", args.task},   {"metric", args.metric}, {"value", value},
                      {"folds", args.folds}, {"seed", args.seed},     {"n", ids.size()},
                      {"encoder", set.encoder_id()}};
  if (classification) j["classes"] = classes;
  emit(args.output, j.dump(2) + "\n", out);
  return 0;
}

int cmd_condition(const ConditionArgs& args, std::ostream& out) {
  const auto weights = load_conditioning_weights(args.weights);
  const fs::path music_path(args.music);
  const auto music = load_embeddings(music_path, "music");
  const auto cond = make_condition(parse_quadrant(args.quadrant), args.valence, args.arousal, args.wgt_q,
                                   parse_convention(args.convention));
  const Eigen::MatrixXd query = emotion_embedding(cond, weights);
  const Eigen::MatrixXd em = cross_attention(query, music.vectors(), weights);
  const RowMatrix em_rows = em;
  if (args.output.empty()) throw UsageError("condition requires -o <output.npy>");
  write_file_atomic(args.output, encode_npy(em_rows));
  const nlohmann::json summary = {{"quadrant", args.quadrant},
                                  {"valence", cond.valence},
                                  {"arousal", cond.arousal},
                                  {"wgt_q", cond.wgt_q},
                                  {"shape", {em.rows(), em.cols()}}};
  out << summary.dump() << "\n";
  return 0;
}

int cmd_synth_check(const SynthArgs& args, std::ostream& out) {
  bool ok = true;
  for (const auto& check : run_synth_checks(args.seed, args.jobs)) {
    out << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail << "\n";
    ok = ok && check.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"emofad: Frechet Audio Distance toolkit for musical-emotion comparisons"};
  app.name("emofad");
  app.require_subcommand(1);

  StatsArgs stats;
  auto* s = app.add_subcommand("stats", "Fit mean/covariance of an embedding file and write JSON");
  s->add_option("--embeddings", stats.embeddings, "Embedding file (.npy or .csv)")->required();
  s->add_option("--encoder", stats.encoder, "Encoder id (default: file stem)");
  s->add_option("--covariance", stats.covariance, "sample|population")->check(CLI::IsMember({"sample", "population"}));
  s->add_option("--jobs", stats.jobs, "Worker threads")->check(CLI::PositiveNumber);
  s->add_option("-o,--output", stats.output, "Output JSON (default: stdout)");

  FadArgs fad;
  auto* f = app.add_subcommand("fad", "Frechet distance between two embedding or stats files");
  f->add_option("--a", fad.a, "First set (.npy, .csv, or stats .json)")->required();
  f->add_option("--b", fad.b, "Second set (.npy, .csv, or stats .json)")->required();
  f->add_option("--covariance", fad.covariance, "sample|population")->check(CLI::IsMember({"sample", "population"}));
  f->add_option("--eps", fad.eps, "Covariance regularization (relative to mean diagonal)")->check(CLI::NonNegativeNumber);
  f->add_option("--tol", fad.tol, "Relative eigenvalue tolerance")->check(CLI::PositiveNumber);
  f->add_option("--jobs", fad.jobs, "Worker threads")->check(CLI::PositiveNumber);
  f->add_option("-o,--output", fad.output, "Also write a JSON score record here");

  PairwiseArgs pw;
  auto* p = app.add_subcommand("pairwise", "FAD between every pair of emotion groups, per encoder and averaged");
  p->add_option("--manifest", pw.manifest, "Manifest CSV (clip_id,valence,arousal,label)")->required();
  p->add_option("--embeddings-dir", pw.embeddings_dir, "Directory of <encoder>.npy/.csv (+ .ids) files")->required();
  p->add_option("--group-by", pw.group_by, "quadrant|label")->check(CLI::IsMember({"quadrant", "label"}));
  p->add_option("--convention", pw.convention, "emomusic|russell")->check(CLI::IsMember({"emomusic", "russell"}));
  p->add_option("--dataset", pw.dataset, "Dataset id for the report (default: manifest stem)");
  p->add_option("--covariance", pw.covariance, "sample|population")->check(CLI::IsMember({"sample", "population"}));
  p->add_option("--eps", pw.eps, "Covariance regularization")->check(CLI::NonNegativeNumber);
  p->add_option("--tol", pw.tol, "Relative eigenvalue tolerance")->check(CLI::PositiveNumber);
  p->add_option("--jobs", pw.jobs, "Worker threads")->check(CLI::PositiveNumber);
  p->add_flag("--normalize", pw.normalize, "Min-max normalize each encoder before averaging");
  p->add_option("--format", pw.format, "json|markdown|csv")->check(CLI::IsMember({"json", "markdown", "md", "csv"}));
  p->add_option("-o,--output", pw.output, "Output file (default: stdout)");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Deviation of candidate reports from a reference report");
  c->add_option("--reference", cmp.reference, "Reference report JSON")->required();
  c->add_option("--candidate", cmp.candidates, "Candidate report JSON (repeatable)")->required();
  c->add_option("--format", cmp.format, "json|markdown|csv")->check(CLI::IsMember({"json", "markdown", "md", "csv"}));
  c->add_option("-o,--output", cmp.output, "Output file (default: stdout)");

  ProbeArgs probe;
  auto* pr = app.add_subcommand("probe", "Cross-validated linear probe with MER metrics");
  pr->add_option("--manifest", probe.manifest, "Manifest CSV")->required();
  pr->add_option("--embeddings", probe.embeddings, "Embedding file")->required();
  pr->add_option("--task", probe.task, "valence|arousal|quadrant|cluster")->required();
  pr->add_option("--metric", probe.metric, "r2|wa|ua|f1")->required();
  pr->add_option("--folds", probe.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  pr->add_option("--seed", probe.seed, "Fold shuffling seed");
  pr->add_option("--lambda", probe.lambda, "Ridge penalty")->check(CLI::NonNegativeNumber);
  pr->add_option("--epochs", probe.epochs, "Softmax probe epochs")->check(CLI::NonNegativeNumber);
  pr->add_option("--lr", probe.lr, "Softmax probe learning rate")->check(CLI::PositiveNumber);
  pr->add_option("--convention", probe.convention, "emomusic|russell")->check(CLI::IsMember({"emomusic", "russell"}));
  pr->add_option("--jobs", probe.jobs, "Accepted for interface symmetry; probes run single-threaded");
  pr->add_option("-o,--output", probe.output, "Output JSON (default: stdout)");

  ConditionArgs cond;
  auto* co = app.add_subcommand("condition", "Emotion embedding + cross-attention over music tokens");
  co->add_option("--quadrant", cond.quadrant, "Q1..Q4")->required()->check(CLI::IsMember({"Q1", "Q2", "Q3", "Q4"}));
  co->add_option("--valence", cond.valence, "Valence in [-1, 1]")->required();
  co->add_option("--arousal", cond.arousal, "Arousal in [-1, 1]")->required();
  co->add_option("--wgt-q", cond.wgt_q, "Quadrant weight in [0, 1]")->check(CLI::Range(0.0, 1.0));
  co->add_option("--weights", cond.weights, "Weights JSON")->required();
  co->add_option("--music", cond.music, "Music token embeddings (T x m_dim .npy)")->required();
  co->add_option("--convention", cond.convention, "emomusic|russell")->check(CLI::IsMember({"emomusic", "russell"}));
  co->add_option("-o,--output", cond.output, "Output .npy for EM")->required();

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth-check", "Run the synthetic oracle suite; nonzero exit on failure");
  sy->add_option("--seed", synth.seed, "Base seed");
  sy->add_option("--jobs", synth.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<char*> argv;
  std::vector<std::string> storage(args);
  for (auto& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) return cmd_stats(stats, out);
    if (f->parsed()) return cmd_fad(fad, out);
    if (p->parsed()) return cmd_pairwise(pw, out);
    if (c->parsed()) return cmd_compare(cmp, out);
    if (pr->parsed()) return cmd_probe(probe, out);
    if (co->parsed()) return cmd_condition(cond, out);
    if (sy->parsed()) return cmd_synth_check(synth, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "ERROR " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "ERROR internal: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace emofad::cli
