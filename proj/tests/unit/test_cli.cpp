#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "gcattack/graph_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "gcattack_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args, const std::string& env = "") {
  const fs::path out = workdir() / "stdout.txt";
  const fs::path err = workdir() / "stderr.txt";
  const std::string cmd = "cd '" + workdir().string() + "' && " + env + " '" GCATTACK_CLI_PATH "' " + args +
                          " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Tiny train/test pair plus a model, shared by the pipeline tests.
void ensure_pipeline() {
  static bool done = false;
  if (done) return;
  REQUIRE(cli("gen-data --builtin object_taxonomy --samples 400 --dim 24 --proto-scale 0.6 --out train.bin").code ==
          0);
  REQUIRE(cli("gen-data --builtin object_taxonomy --samples 30 --dim 24 --proto-scale 0.6 --stream 1 --out test.bin")
              .code == 0);
  REQUIRE(cli("train --builtin object_taxonomy --data train.bin --epochs 15 --out model.json").code == 0);
  done = true;
}

}  // namespace

TEST_CASE("expand prints the cascaded set with provenance") {
  const auto r = cli("expand --builtin small_tree --state '{\"R\": 1, \"W\": 1, \"A\": 1, \"B\": -1}' --target A");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("gamma = {A, W, R}") != std::string::npos);
  CHECK(r.out.find("A TurnOff Target") != std::string::npos);
  CHECK(r.out.find("W TurnOff ParentCascade") != std::string::npos);
  CHECK(r.out.find("R TurnOff ParentCascade") != std::string::npos);

  const auto j = cli("expand --builtin small_tree --on R,W,A --target A --format json");
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  REQUIRE(doc["gamma"].size() == 3);
  CHECK(doc["gamma"][1]["label"] == "W");
  CHECK(doc["gamma"][1]["provenance"] == "ParentCascade");
}

TEST_CASE("verify prints text and JSON lines") {
  const auto text = cli("verify --builtin small_tree --on R,W");
  CHECK(text.code == 0);
  CHECK(text.out.find("inconsistent") != std::string::npos);
  CHECK(text.out.find("W: NoOnChild") != std::string::npos);
  const auto lines = cli("verify --builtin small_tree --on R,W --format jsonl");
  CHECK(lines.out == "{\"node\":\"W\",\"rule\":\"NoOnChild\"}\n");
  const auto ok = cli("verify --builtin small_tree --on R,W,B --center A --radius 1");
  CHECK(ok.out.rfind("consistent", 0) == 0);
}

TEST_CASE("gen-graph treeifies candidates") {
  write(workdir() / "cands.json", R"([
    {"child": "mammal", "parents": ["animal"]},
    {"child": "pet", "parents": ["animal"]},
    {"child": "dog", "parents": ["mammal", "pet"]},
    {"child": "cat", "parents": ["pet", "mammal"]}
  ])");
  REQUIRE(cli("gen-graph --candidates cands.json --treeify --out tree.json").code == 0);
  const auto g = gcattack::load_graph(workdir() / "tree.json");
  CHECK(g.size() == 5);
  CHECK(g.edge_count() == 4);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.parents(gcattack::label_id(i)).size() <= 1);
  CHECK(fs::exists(workdir() / "tree.json.manifest.json"));
}

TEST_CASE("exit codes") {
  write(workdir() / "cycle.json", R"({"labels": ["a", "b"], "edges": [["a", "b"], ["b", "a"]]})");
  const auto cyc = cli("gen-graph --graph cycle.json --out never.json");
  CHECK(cyc.code == 3);
  CHECK(cyc.err.find("CycleDetected") != std::string::npos);
  CHECK_FALSE(fs::exists(workdir() / "never.json"));

  write(workdir() / "broken.json", "{\"labels\": [\"a\",\n \"b\"");
  const auto bad = cli("gen-graph --graph broken.json --out never.json");
  CHECK(bad.code == 3);
  CHECK(bad.err.find("line 2") != std::string::npos);

  CHECK(cli("sweep --epsilons").code == 2);
  CHECK(cli("no-such-command").code == 2);
  CHECK(cli("verify --builtin small_tree --on Z").code == 3);
  CHECK(cli("gen-data --builtin small_tree --out /proc/forbidden/x.bin").code == 4);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("sweep over six budgets and four variants gives 24 rows") {
  ensure_pipeline();
  const auto r = cli("--jobs 2 sweep --builtin object_taxonomy --model model.json --data test.bin "
                     "--epsilons 0.001,0.002,0.003,0.004,0.005,0.006 --out-dir sweep6");
  REQUIRE(r.code == 0);
  const std::string csv = slurp(workdir() / "sweep6" / "metrics.csv");
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 25);
  CHECK(csv.rfind("variant,epsilon,n_attacked,n_success,n_detected_local,n_detected_global,sr_n,sr_l,sr_g,dr_l,dr_g\n",
                  0) == 0);
  CHECK(fs::exists(workdir() / "sweep6" / "records.jsonl"));
  CHECK(fs::exists(workdir() / "sweep6" / "manifest.json"));

  const auto plot = cli("plot-data --csv sweep6/metrics.csv --out plot.json");
  REQUIRE(plot.code == 0);
  const auto doc = nlohmann::json::parse(slurp(workdir() / "plot.json"));
  CHECK(doc["series"].size() == 4);
  CHECK(doc["series"]["GMLA_beta"]["epsilon"].size() == 6);
}

TEST_CASE("replay reproduces outputs and inputs are untouched") {
  ensure_pipeline();
  const std::string model_before = slurp(workdir() / "model.json");
  const std::string data_before = slurp(workdir() / "test.bin");
  REQUIRE(cli("--jobs 1 sweep --builtin object_taxonomy --model model.json --data test.bin --epsilons 0.2,0.5 "
              "--out-dir replayed")
              .code == 0);
  const std::string csv = slurp(workdir() / "replayed" / "metrics.csv");
  const std::string jsonl = slurp(workdir() / "replayed" / "records.jsonl");
  const auto r = cli("replay --manifest replayed/manifest.json");
  CHECK(r.code == 0);
  CHECK(r.out.find("reproduced") != std::string::npos);
  CHECK(slurp(workdir() / "replayed" / "metrics.csv") == csv);
  CHECK(slurp(workdir() / "replayed" / "records.jsonl") == jsonl);
  CHECK(slurp(workdir() / "model.json") == model_before);
  CHECK(slurp(workdir() / "test.bin") == data_before);

  // Replaying the training step reproduces the model bit for bit.
  CHECK(cli("replay --manifest model.json.manifest.json").code == 0);
  CHECK(slurp(workdir() / "model.json") == model_before);

  // Refuses to write over its own input.
  CHECK(cli("train --builtin object_taxonomy --data train.bin --epochs 1 --out train.bin").code == 2);
}

TEST_CASE("strict mode checks input hashes") {
  ensure_pipeline();
  CHECK(cli("--strict attack --builtin object_taxonomy --model model.json --data test.bin --image 1 --out a.json").code == 0);
  fs::copy_file(workdir() / "model.json", workdir() / "model_copy.json", fs::copy_options::overwrite_existing);
  CHECK(cli("--strict attack --builtin object_taxonomy --model model_copy.json --data test.bin --image 1").code == 3);
  CHECK(cli("attack --builtin object_taxonomy --model model_copy.json --data test.bin --image 1 --out b.json").code == 0);
}

TEST_CASE("config file and environment feed the resolved configuration") {
  ensure_pipeline();
  write(workdir() / "sweep.toml", "[sweep]\nepsilons = [0.05, 0.1]\nsteps = 4\n");
  REQUIRE(cli("--config sweep.toml sweep --builtin object_taxonomy --model model.json --data test.bin "
              "--steps 6 --out-dir cfg")
              .code == 0);
  const auto m = nlohmann::json::parse(slurp(workdir() / "cfg" / "manifest.json"));
  CHECK(m["config"]["sweep"]["steps"] == "6");  // flag beats config file
  CHECK(m["config"]["sweep"]["epsilons"] == nlohmann::json::array({"0.05", "0.1"}));
  const std::string csv = slurp(workdir() / "cfg" / "metrics.csv");
  CHECK(csv.find("MLA_alpha,0.05,") != std::string::npos);

  REQUIRE(cli("sweep --builtin object_taxonomy --model model.json --data test.bin --epsilons 0.1 --out-dir envrun",
              "GCATTACK_MAX_IMAGES=5")
              .code == 0);
  const auto e = nlohmann::json::parse(slurp(workdir() / "envrun" / "manifest.json"));
  CHECK(e["config"]["sweep"]["max-images"] == "5");
  // Replay needs nothing from the environment.
  CHECK(cli("replay --manifest envrun/manifest.json").code == 0);
}
