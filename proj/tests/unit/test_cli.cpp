#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "emofad/cli.hpp"
#include "emofad/conditioning.hpp"
#include "emofad/embedding_io.hpp"
#include "emofad/report.hpp"
#include "test_util.hpp"

using namespace emofad;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "emofad");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Exit status of the real binary with stdout captured to a file.
int run_binary(const std::string& args, const fs::path& stdout_path) {
  const std::string cmd = std::string("\"") + EMOFAD_BINARY + "\" " + args + " > \"" + stdout_path.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// Four quadrants of 40 clips with VA labels and two encoders whose group means differ.
fs::path write_quadrant_fixture(const emofad::testing::TempDir& dir) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mag(0.1, 0.9);
  std::string manifest = "clip_id,valence,arousal,label\n";
  std::vector<std::string> ids;
  std::vector<int> quad;
  const int signs[4][2] = {{-1, 1}, {-1, -1}, {1, 1}, {1, -1}};  // emomusic Q1..Q4
  for (int q = 0; q < 4; ++q) {
    for (int i = 0; i < 40; ++i) {
      const std::string id = "clip" + std::to_string(q) + "_" + std::to_string(i);
      ids.push_back(id);
      quad.push_back(q);
      manifest += id + "," + std::to_string(signs[q][0] * mag(rng)) + "," + std::to_string(signs[q][1] * mag(rng)) + ",\n";
    }
  }
  write_text(dir / "emo.csv", manifest);
  fs::create_directories(dir / "emb");
  for (const std::string enc : {"alpha", "beta"}) {
    RowMatrix m = emofad::testing::random_matrix(static_cast<Eigen::Index>(ids.size()), 5, rng);
    for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r).array() += 0.7 * quad[static_cast<std::size_t>(r)];
    write_embeddings(dir / "emb" / (enc + ".npy"), EmbeddingSet(enc, m, ids));
  }
  return dir / "emo.csv";
}

}  // namespace

TEST_CASE("fad: identical files print 0.0") {
  emofad::testing::TempDir dir;
  std::mt19937_64 rng(1);
  write_embeddings(dir / "x.npy", EmbeddingSet("x", emofad::testing::random_matrix(50, 4, rng)));
  const auto r = run_cli({"fad", "--a", (dir / "x.npy").string(), "--b", (dir / "x.npy").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "0.0\n");
}

TEST_CASE("fad: stats JSON inputs agree with raw embeddings") {
  emofad::testing::TempDir dir;
  std::mt19937_64 rng(2);
  write_embeddings(dir / "a.npy", EmbeddingSet("a", emofad::testing::random_matrix(80, 3, rng)));
  write_embeddings(dir / "b.npy", EmbeddingSet("b", emofad::testing::random_matrix(60, 3, rng, 1.5, 1.0)));
  const auto sa = run_cli({"stats", "--embeddings", (dir / "a.npy").string(), "-o", (dir / "a.json").string()});
  REQUIRE(sa.code == 0);
  const auto raw = run_cli({"fad", "--a", (dir / "a.npy").string(), "--b", (dir / "b.npy").string()});
  const auto mixed = run_cli({"fad", "--a", (dir / "a.json").string(), "--b", (dir / "b.npy").string(), "-o",
                              (dir / "score.json").string()});
  CHECK(raw.code == 0);
  CHECK(mixed.out == raw.out);
  std::ifstream in(dir / "score.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j.at("value").get<double>() == std::stod(raw.out));
  const auto stats = nlohmann::json::parse(std::ifstream(dir / "a.json"));
  CHECK(stats.at("encoder_id") == "a");
  CHECK(stats.at("count") == 80);
  CHECK(stats.at("cov").size() == 3);
}

TEST_CASE("domain and usage errors") {
  emofad::testing::TempDir dir;
  write_text(dir / "cube.npy", encode_npy({2, 2, 2}, std::vector<double>(8, 1.0), NpyDtype::kFloat64));
  write_embeddings(dir / "ok.npy", EmbeddingSet("ok", RowMatrix::Ones(3, 2)));
  const auto r = run_cli({"fad", "--a", (dir / "cube.npy").string(), "--b", (dir / "ok.npy").string()});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("ERROR shape: expected 2-D", 0) == 0);

  const auto single = run_cli({"fad", "--a", (dir / "ok.npy").string(), "--b", (dir / "ok.npy").string()});
  // 3 identical rows: sample covariance is zero, FAD is 0.
  CHECK(single.code == 0);

  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"nonsense"}).code == 2);
  CHECK(run_cli({"fad", "--a", "x.npy"}).code == 2);
  CHECK(run_cli({"pairwise", "--manifest", "m.csv", "--embeddings-dir", "d", "--group-by", "mood"}).code == 2);
  CHECK(run_cli({"fad", "--help"}).code == 0);
  const auto missing = run_cli({"fad", "--a", (dir / "nope.npy").string(), "--b", (dir / "ok.npy").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.rfind("ERROR io:", 0) == 0);
}

TEST_CASE("pairwise: four quadrants give six pairs in every format") {
  emofad::testing::TempDir dir;
  const auto manifest = write_quadrant_fixture(dir);
  const auto r = run_cli({"pairwise", "--manifest", manifest.string(), "--embeddings-dir", (dir / "emb").string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("dataset") == "emo");
  CHECK(j.at("pairs") == nlohmann::json::array({"Q1_Q2", "Q1_Q3", "Q1_Q4", "Q2_Q3", "Q2_Q4", "Q3_Q4"}));
  CHECK(j.at("encoders") == nlohmann::json::array({"alpha", "beta"}));
  // Group means sit 0.7 * |qi - qj| apart per coordinate, so Q1_Q4 is the farthest pair.
  CHECK(j.at("aggregate").at("Q1_Q4").get<double>() > j.at("aggregate").at("Q1_Q2").get<double>());

  const auto md = run_cli({"pairwise", "--manifest", manifest.string(), "--embeddings-dir", (dir / "emb").string(),
                           "--format", "markdown", "--dataset", "EMOMusic"});
  CHECK(md.out.rfind("| Source | Q1_Q2 | Q1_Q3 | Q1_Q4 | Q2_Q3 | Q2_Q4 | Q3_Q4 |\n", 0) == 0);
  CHECK(md.out.find("| EMOMusic |") != std::string::npos);

  const auto csv = run_cli({"pairwise", "--manifest", manifest.string(), "--embeddings-dir", (dir / "emb").string(),
                            "--format", "csv", "-o", (dir / "r.csv").string()});
  CHECK(csv.code == 0);
  CHECK(csv.out.empty());
  std::ifstream in(dir / "r.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "row,Q1_Q2,Q1_Q3,Q1_Q4,Q2_Q3,Q2_Q4,Q3_Q4");
}

TEST_CASE("pairwise: missing embedding for a manifest clip") {
  emofad::testing::TempDir dir;
  const auto manifest = write_quadrant_fixture(dir);
  std::ofstream(manifest, std::ios::app) << "stray,0.5,0.5,\n";
  const auto r = run_cli({"pairwise", "--manifest", manifest.string(), "--embeddings-dir", (dir / "emb").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("stray") != std::string::npos);
}

TEST_CASE("compare: reference and candidates") {
  emofad::testing::TempDir dir;
  auto make = [&](const std::string& name, double first) {
    FadReport rep;
    rep.dataset_id = name;
    rep.pairs = {"Q1_Q2", "Q3_Q4"};
    rep.aggregate = {{"Q1_Q2", first}, {"Q3_Q4", 1.47}};
    write_text(dir / (name + ".json"), to_json(rep).dump());
  };
  make("real", 1.36);
  make("ours", 1.61);
  const auto r = run_cli({"compare", "--reference", (dir / "real.json").string(), "--candidate",
                          (dir / "ours.json").string(), "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j.at("candidates").at(0).at("deviation").at("Q1_Q2").get<double>() - 0.25) <= 1e-9);
  const auto md = run_cli({"compare", "--reference", (dir / "real.json").string(), "--candidate",
                           (dir / "ours.json").string()});
  CHECK(md.out.find("| real | 1.36 | 1.47 |") != std::string::npos);
  CHECK(md.out.find("| ours | 1.61 | 1.47 |") != std::string::npos);
}

TEST_CASE("probe: quadrant classification on separable embeddings") {
  emofad::testing::TempDir dir;
  const auto manifest = write_quadrant_fixture(dir);
  const auto emb = (dir / "emb" / "alpha.npy").string();
  const auto wa = run_cli({"probe", "--manifest", manifest.string(), "--embeddings", emb, "--task", "quadrant",
                           "--metric", "wa"});
  REQUIRE(wa.code == 0);
  const auto j = nlohmann::json::parse(wa.out);
  CHECK(j.at("n") == 160);
  CHECK(j.at("classes") == nlohmann::json::array({"Q1", "Q2", "Q3", "Q4"}));
  CHECK(j.at("value").get<double>() > 0.25);
  const auto again = run_cli({"probe", "--manifest", manifest.string(), "--embeddings", emb, "--task", "quadrant",
                              "--metric", "wa"});
  CHECK(again.out == wa.out);

  const auto r2 = run_cli({"probe", "--manifest", manifest.string(), "--embeddings", emb, "--task", "valence",
                           "--metric", "r2"});
  CHECK(r2.code == 0);
  CHECK(run_cli({"probe", "--manifest", manifest.string(), "--embeddings", emb, "--task", "valence", "--metric",
                 "wa"}).code == 2);
}

TEST_CASE("condition: writes EM and reports the clamped target") {
  emofad::testing::TempDir dir;
  std::mt19937_64 rng(5);
  ConditioningWeights w;
  w.quadrant_table = emofad::testing::random_matrix(4, 6, rng);
  w.va_projection = emofad::testing::random_matrix(2, 6, rng);
  w.va_bias = emofad::testing::random_matrix(1, 6, rng);
  w.attn_q = emofad::testing::random_matrix(6, 3, rng);
  w.attn_k = emofad::testing::random_matrix(4, 3, rng);
  w.attn_v = emofad::testing::random_matrix(4, 5, rng);
  write_text(dir / "w.json", to_json(w).dump());
  write_embeddings(dir / "music.npy", EmbeddingSet("music", emofad::testing::random_matrix(7, 4, rng)));
  const auto r = run_cli({"condition", "--quadrant", "Q1", "--valence", "-0.3", "--arousal", "0.8", "--wgt-q", "0.5",
                          "--weights", (dir / "w.json").string(), "--music", (dir / "music.npy").string(), "-o",
                          (dir / "em.npy").string()});
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(r.out);
  CHECK(summary.at("valence") == 0.3);
  CHECK(summary.at("arousal") == 0.8);
  const auto em = read_npy(dir / "em.npy");
  CHECK(em.shape == std::vector<std::size_t>{1, 5});

  const auto cond = make_condition(Quadrant::kQ1, -0.3, 0.8, 0.5, QuadrantConvention::kRussell);
  const Eigen::MatrixXd expect =
      cross_attention(emotion_embedding(cond, w), load_embeddings(dir / "music.npy", "music").vectors(), w);
  for (Eigen::Index c = 0; c < 5; ++c) CHECK(em.data[static_cast<std::size_t>(c)] == expect(0, c));
}

TEST_CASE("synth-check prints one PASS line per check") {
  const auto r = run_cli({"synth-check", "--seed", "42"});
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  int lines = 0;
  for (std::string line; std::getline(in, line); ++lines) CHECK(line.rfind("PASS ", 0) == 0);
  CHECK(lines >= 5);
}

TEST_CASE("binary: --jobs does not change a byte of output") {
  emofad::testing::TempDir dir;
  const auto manifest = write_quadrant_fixture(dir);
  const std::string base = "pairwise --manifest \"" + manifest.string() + "\" --embeddings-dir \"" +
                           (dir / "emb").string() + "\"";
  CHECK(run_binary(base + " --jobs 1 -o \"" + (dir / "j1.json").string() + "\"", dir / "log1") == 0);
  CHECK(run_binary(base + " --jobs 8 -o \"" + (dir / "j8.json").string() + "\"", dir / "log8") == 0);
  CHECK(read_file(dir / "j1.json") == read_file(dir / "j8.json"));

  const auto a = (dir / "emb" / "alpha.npy").string();
  CHECK(run_binary("stats --embeddings \"" + a + "\" --jobs 1", dir / "s1") == 0);
  CHECK(run_binary("stats --embeddings \"" + a + "\" --jobs 8", dir / "s8") == 0);
  CHECK(read_file(dir / "s1") == read_file(dir / "s8"));

  CHECK(run_binary("fad --a missing.npy --b missing.npy", dir / "err") == 1);
  CHECK(run_binary("fad", dir / "usage") == 2);
}
