#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "divaug/oracle.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = divaug::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("divaug_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kTiny = "synthetic:classes=3,per_class=4,size=10,channels=3,seed=2";

}  // namespace

TEST_CASE("select-demo on {e1, e1, e2} reports the brute-force optimum 0.5") {
  const fs::path dir = scratch("demo");
  {
    std::ofstream csv(dir / "vectors.csv");
    csv << "1,0\n1,0\n0,1\n";
  }
  const Outcome r = run({"select-demo", "--input", (dir / "vectors.csv").string(), "--S", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("brute-force indices=0,2 diversity=0.5\n") != std::string::npos);
  CHECK(r.out.find("kmeans++") != std::string::npos);
  CHECK(r.out.find("random") != std::string::npos);

  CHECK(run({"select-demo", "--input", (dir / "vectors.csv").string(), "--S", "4"}).code == 2);
  CHECK(run({"select-demo", "--input", (dir / "missing.csv").string()}).code == 1);
}

TEST_CASE("usage errors exit with 2") {
  const Outcome epochs = run({"train", "--epochs", "0"});
  CHECK(epochs.code == 2);
  CHECK(epochs.err.find("epochs") != std::string::npos);
  const Outcome unknown = run({"frobnicate"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("train") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"train", "--strategy", "best"}).code == 2);
  CHECK(run({"train", "--lr", "fast"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("train writes outputs and measure reads the checkpoint") {
  const fs::path dir = scratch("train");
  {
    std::ofstream config(dir / "run.cfg");
    config << "dataset = " << kTiny << "\nepochs = 5\nE = 4\nS = 2\nbatch_size = 4\nhidden_units = 8\n";
  }
  const Outcome train = run({"train", "--config", (dir / "run.cfg").string(), "--epochs", "2", "--seed", "3",
                             "--output-dir", (dir / "out").string()});
  REQUIRE(train.code == 0);
  for (const char* name : {"metrics.jsonl", "metrics.csv", "subpolicy_stats.csv", "checkpoint.dvag"}) {
    CHECK(fs::exists(dir / "out" / name));
  }
  // Flags override the file: two epochs, not five.
  std::ifstream csv(dir / "out" / "subpolicy_stats.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == 3U);

  const std::string checkpoint = (dir / "out" / "checkpoint.dvag").string();
  const Outcome identity = run({"measure", "--checkpoint", checkpoint, "--dataset", kTiny, "--strategy", "identity"});
  REQUIRE(identity.code == 0);
  CHECK(identity.out.find("variance_diversity 0\n") != std::string::npos);
  CHECK(identity.out.find("affinity 0\n") != std::string::npos);

  const Outcome divaug = run({"measure", "--checkpoint", checkpoint, "--dataset", kTiny, "--output-dir",
                              (dir / "measure").string()});
  REQUIRE(divaug.code == 0);
  CHECK(divaug.out.find("variance_diversity 0\n") == std::string::npos);
  CHECK(fs::exists(dir / "measure" / "measure.jsonl"));

  CHECK(run({"measure", "--checkpoint", (dir / "nope.dvag").string()}).code == 1);
}

TEST_CASE("augment writes E images per input and a manifest") {
  const fs::path dir = scratch("augment");
  const Outcome r = run({"augment", "--dataset", kTiny, "--E", "3", "--limit", "2", "--output-dir", dir.string()});
  REQUIRE(r.code == 0);
  std::ifstream manifest(dir / "manifest.tsv");
  std::vector<std::string> lines;
  for (std::string line; std::getline(manifest, line);) lines.push_back(line);
  REQUIRE(lines.size() == 7U);
  CHECK(lines[0] == "file\tsource\tlabel\tcandidate\tsubpolicy");
  CHECK(lines[1].rfind("img0_cand0.ppm\t0\t", 0) == 0);
  CHECK(fs::exists(dir / "img1_cand2.ppm"));
  CHECK(run({"augment", "--dataset", kTiny}).code == 2);
}
