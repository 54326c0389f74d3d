#include <doctest.h>

#include <json.hpp>

#include <algorithm>

#include "../cli_support.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = FATIGUESCOPE_CLI;
const fs::path kFixtures = FATIGUESCOPE_FIXTURES;

clitest::Result cli(const std::vector<std::string>& args, const testutil::TempDir& dir,
                    const fs::path& cwd = kFixtures) {
  return clitest::run(kCli, args, cwd, dir / "io");
}

}  // namespace

TEST_CASE("help lists every subcommand and exits zero") {
  testutil::TempDir dir;
  const auto r = cli({"--help"}, dir);
  CHECK(r.status == 0);
  for (const char* sub : {"ingest", "extract", "rate-serve", "labels", "train", "tune", "predict", "analyze", "pipeline"}) {
    CHECK(r.out.find(sub) != std::string::npos);
  }
  const auto t = cli({"train", "--help"}, dir);
  for (const char* flag : {"--features", "--labels", "--out", "--method", "--cycles", "--learn-rate", "--min-leaf",
                           "--max-depth", "--seed", "--config"}) {
    CHECK(t.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("usage errors exit 2") {
  testutil::TempDir dir;
  auto r = cli({"frobnicate"}, dir);
  CHECK(r.status == 2);
  r = cli({"train", "--cycles", "many"}, dir);
  CHECK(r.status == 2);
  CHECK(r.err.rfind("error: usage:", 0) == 0);
  r = cli({}, dir);
  CHECK(r.status == 2);
}

TEST_CASE("missing input is an io error") {
  testutil::TempDir dir;
  const auto r = cli({"ingest", "--input", (dir / "nope.jsonl").string(), "--out", (dir / "c.jsonl").string()}, dir);
  CHECK(r.status == 3);
  CHECK(r.err.find("error: io:") == 0);
}

TEST_CASE("ingest writes the corpus, stats and a manifest") {
  testutil::TempDir dir;
  const auto out = dir / "corpus.jsonl";
  const auto r = cli({"ingest", "--input", "records.jsonl", "--min-posts", "3", "--out", out.string(),
                      "--demographics", (dir / "demo.json").string()},
                     dir);
  REQUIRE(r.status == 0);
  CHECK(fs::exists(out));
  CHECK(fs::exists(dir / "demo.json"));
  const auto stats = json::parse(clitest::slurp(dir / "corpus.jsonl.stats.json"));
  CHECK(stats["records_read"] == 20);
  const auto m = json::parse(clitest::slurp(dir / "corpus.jsonl.manifest.json"));
  CHECK(m["subcommand"] == "ingest");
  CHECK(m["inputs"][0]["path"] == "records.jsonl");
}

TEST_CASE("train rejects mismatched labels with input-mismatch") {
  testutil::TempDir dir;
  const auto feats = dir / "f.bin";
  REQUIRE(cli({"extract", "--images", "images", "--records", "records.jsonl", "--out", feats.string()}, dir).status == 0);
  testutil::write_text(dir / "labels.csv", "face_id,fatigue_label\nu01_f0,50\nu01_f1,55\n");
  const auto r = cli({"train", "--features", feats.string(), "--labels", (dir / "labels.csv").string(), "--out",
                      (dir / "m.json").string()},
                     dir);
  CHECK(r.status == 6);
  CHECK(r.err.find("error: input-mismatch:") == 0);
  CHECK_FALSE(fs::exists(dir / "m.json"));
}

TEST_CASE("train reproduces the frozen model") {
  testutil::TempDir dir;
  const auto feats = dir / "f.bin";
  REQUIRE(cli({"extract", "--images", "images", "--records", "records.jsonl", "--out", feats.string()}, dir).status == 0);
  const auto r = cli({"train", "--config", "train_config.json", "--features", feats.string(), "--labels",
                      "train_labels.csv", "--out", (dir / "m.json").string()},
                     dir);
  REQUIRE(r.status == 0);
  CHECK(clitest::slurp(dir / "m.json") == clitest::slurp(kFixtures / "model.json"));
  const auto bad = cli({"train", "--config", "train_config.json", "--learn-rate", "0", "--features", feats.string(),
                        "--labels", "train_labels.csv", "--out", (dir / "m2.json").string()},
                       dir);
  CHECK(bad.status == 7);
}

TEST_CASE("labels without completed sessions exit no-complete-sessions") {
  testutil::TempDir dir;
  testutil::write_text(dir / "faces.json", R"({"faces":[{"face_id":"u01_f0","primary":")" +
                                               (kFixtures / "images/u01_f0.pgm").string() + R"(","references":[]}]})");
  const auto r = cli({"labels", "--faces", (dir / "faces.json").string(), "--journal", (dir / "none.jsonl").string(),
                      "--out", (dir / "labels.csv").string()},
                     dir);
  CHECK(r.status == 8);
  CHECK(r.err.find("error: no-complete-sessions:") == 0);
}

TEST_CASE("labels from a journal") {
  testutil::TempDir dir;
  testutil::write_text(dir / "faces.json", R"({"faces":[{"face_id":"a","primary":"a.pgm","references":[]}]})");
  std::string cues = "{";
  for (auto c : fatiguescope::kCues) cues += "\"" + std::string(fatiguescope::to_string(c)) + "\":1,";
  cues.back() = '}';
  testutil::write_text(dir / "j.jsonl",
                       R"({"event":"open","session_id":"s1","rater_id":"r","seed":0})"
                       "\n"
                       R"({"event":"rating","session_id":"s1","face_id":"a","cues":)" +
                           cues + "}\n");
  const auto r = cli({"labels", "--faces", (dir / "faces.json").string(), "--journal", (dir / "j.jsonl").string(),
                      "--out", (dir / "labels.csv").string()},
                     dir);
  REQUIRE(r.status == 0);
  const auto csv = clitest::slurp(dir / "labels.csv");
  const auto row = csv.find("\na,1,1,1,1,1,1,1,1,");
  REQUIRE(row != std::string::npos);
  CHECK(std::stod(csv.substr(csv.rfind(',') + 1)) == doctest::Approx(50.11));
  CHECK(fs::exists(dir / "labels.csv.histogram.csv"));
}

TEST_CASE("predict and analyze") {
  testutil::TempDir dir;
  const auto feats = dir / "f.bin";
  REQUIRE(cli({"extract", "--images", "images", "--records", "records.jsonl", "--out", feats.string()}, dir).status == 0);
  REQUIRE(cli({"predict", "--model", "model.json", "--features", feats.string(), "--out", (dir / "p.csv").string()},
              dir)
              .status == 0);
  REQUIRE(cli({"ingest", "--input", "records.jsonl", "--min-posts", "3", "--out", (dir / "c.jsonl").string()}, dir)
              .status == 0);
  const auto r = cli({"analyze", "--corpus", (dir / "c.jsonl").string(), "--predictions", (dir / "p.csv").string(),
                      "--group-by", "age", "--min-group-size", "2", "--out", (dir / "report").string()},
                     dir);
  REQUIRE(r.status == 0);
  CHECK(clitest::slurp(dir / "report/means.csv") == clitest::slurp(kFixtures / "golden/means.csv"));
  CHECK(fs::exists(dir / "report/manifest.json"));
  const auto bad = cli({"analyze", "--corpus", (dir / "c.jsonl").string(), "--predictions", (dir / "p.csv").string(),
                        "--group-by", "shoe-size", "--out", (dir / "r2").string()},
                       dir);
  CHECK(bad.status != 0);
  CHECK_FALSE(fs::exists(dir / "r2"));
}

TEST_CASE("tune writes a best config and a trial log") {
  testutil::TempDir dir;
  const auto feats = dir / "f.bin";
  REQUIRE(cli({"extract", "--images", "images", "--records", "records.jsonl", "--out", feats.string()}, dir).status == 0);
  const auto r = cli({"tune", "--features", feats.string(), "--labels", "train_labels.csv", "--budget", "6", "--k",
                      "4", "--seed", "1", "--out", (dir / "best.json").string(), "--log", (dir / "trials.csv").string()},
                     dir);
  REQUIRE(r.status == 0);
  const auto best = json::parse(clitest::slurp(dir / "best.json"));
  CHECK(best.contains("cycles"));
  const auto log = clitest::slurp(dir / "trials.csv");
  CHECK(std::count(log.begin(), log.end(), '\n') == 7);
}

TEST_CASE("pipeline matches the golden outputs") {
  testutil::TempDir dir;
  const auto out = dir / "run";
  const auto r = cli({"pipeline", "--config", "pipeline_config.json", "--input", "records.jsonl", "--images", "images",
                      "--model", "model.json", "--out", out.string()},
                     dir);
  REQUIRE(r.status == 0);
  auto files = clitest::listing(out);
  CHECK(std::find(files.begin(), files.end(), "manifest.json") != files.end());
  files.erase(std::remove(files.begin(), files.end(), "manifest.json"), files.end());
  CHECK(files == clitest::listing(kFixtures / "golden"));
  for (const auto& f : files) {
    INFO(f);
    CHECK(clitest::slurp(out / f) == clitest::slurp(kFixtures / "golden" / f));
  }
  CHECK_FALSE(fs::exists(dir / "run.partial"));
}
