#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ringgnn/config.hpp"
#include "ringgnn/dataset.hpp"
#include "ringgnn/graph.hpp"

using namespace ringgnn;
namespace fs = std::filesystem;

namespace {

const std::string kSource = RINGGNN_SOURCE_DIR;
const std::string kCli = RINGGNN_CLI;

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("ringgnn_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Writes a TU triple DS_* into dir/DS and returns the directory.
fs::path tu_dir(const std::string& ds, const std::string& a, const std::string& ind, const std::string& labels) {
  fs::path dir = scratch("tu") / ds;
  fs::create_directories(dir);
  write(dir / (ds + "_A.txt"), a);
  write(dir / (ds + "_graph_indicator.txt"), ind);
  write(dir / (ds + "_graph_labels.txt"), labels);
  return dir;
}

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "ringgnn_io_cli.txt";
  const std::string cmd = "cd '" + kSource + "' && '" + kCli + "' " + args + " > '" + out.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("ingest_tu: fixture dataset") {
  Dataset d = ingest_tu(kSource + "/data/TINY");
  CHECK(d.name == "TINY");
  REQUIRE(d.size() == 2);
  CHECK(d.graphs[0].n() == 2);
  CHECK(d.graphs[1].n() == 3);
  CHECK(d.graphs[0].edge_count() == 1);
  CHECK(d.graphs[1].edge_count() == 3);
  CHECK(d.graphs[1].is_simple());
  CHECK(d.labels == std::vector<int>{0, 1});
  CHECK(d.classes == 2);
  CHECK(d.mean_nodes() == 2.5);
  // Idempotent and order stable.
  Dataset again = ingest_tu(kSource + "/data/TINY");
  CHECK(again.graphs == d.graphs);
  CHECK(again.labels == d.labels);
}

TEST_CASE("ingest_tu: separators, symmetrisation and label remapping") {
  // One direction per edge, mixed separators, labels 7 and 3.
  auto dir = tu_dir("MIX", "1,2\n2 3\n 4 ,5\n", "1\n1\n1\n2\n2\n", "7\n3\n");
  Dataset d = ingest_tu(dir.string());
  REQUIRE(d.size() == 2);
  CHECK(d.graphs[0].has_edge(1, 0));
  CHECK(d.graphs[0].has_edge(2, 1));
  CHECK(d.graphs[1].has_edge(0, 1));
  CHECK(d.labels == std::vector<int>{1, 0});
}

TEST_CASE("ingest_tu: errors carry the file and line") {
  auto missing = scratch("missing") / "GONE";
  fs::create_directories(missing);
  CHECK_THROWS_AS(ingest_tu(missing.string()), IngestionError);
  CHECK_THROWS_AS(ingest_tu((scratch("nodir") / "NOPE").string()), IngestionError);

  auto dangling = tu_dir("DANG", "1, 2\n2, 9\n", "1\n1\n", "0\n");
  try {
    ingest_tu(dangling.string());
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("DANG_A.txt:2") != std::string::npos);
  }
  auto word = tu_dir("WORD", "1, 2\n", "1\nx\n", "0\n");
  try {
    ingest_tu(word.string());
    FAIL("expected an ingestion error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("WORD_graph_indicator.txt:2") != std::string::npos);
  }
  auto cross = tu_dir("CROSS", "1, 3\n", "1\n1\n2\n", "0\n1\n");
  CHECK_THROWS_AS(ingest_tu(cross.string()), IngestionError);
}

TEST_CASE("config: presets by name and through a file") {
  ExperimentConfig svd = parse_config("preset = csl-ring-gnn-svd\n");
  CHECK(svd.adam.lr == 0.001);
  CHECK(svd.epochs == 1000);
  CHECK(svd.model.ring.widths.size() == 3);  // two Ring-GNN layers
  CHECK(svd.model.ring.use_eigenvalues);
  CHECK(svd.model.ring.num_eigenvalues == 5);

  ExperimentConfig s5 = load_config("csl-sgnn-5");
  CHECK(s5.model.family == ModelFamily::kSgnn);
  CHECK(s5.model.sgnn.layers == 5);
  CHECK(s5.model.sgnn.width == 64);
  CHECK(s5.adam.lr == 0.01);

  ExperimentConfig tweaked = parse_config("preset = csl-gin\nname = mine\n[training]\nepochs = 3\nseeds = 4, 5\n");
  CHECK(tweaked.name == "mine");
  CHECK(tweaked.epochs == 3);
  CHECK(tweaked.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(tweaked.model.gin.width == 64);

  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const std::string text = config_to_text(preset(name));
    CHECK(config_to_text(parse_config(text)) == text);
  }
  CHECK_THROWS_AS(load_config("no-such-preset"), ConfigError);
}

TEST_CASE("config: errors name the key") {
  CHECK(error_of([] { parse_config(""); }).find("empty") != std::string::npos);
  CHECK(error_of([] { parse_config("# only a comment\n\n"); }).find("empty") != std::string::npos);
  CHECK(error_of([] { parse_config("preset = csl-gin\n[training]\nepochs = ten\n"); }).find("training.epochs") !=
        std::string::npos);
  CHECK(error_of([] { parse_config("preset = csl-gin\n[training]\nepoch = 3\n"); }).find("training.epoch:") !=
        std::string::npos);
  CHECK(error_of([] { parse_config("preset = csl-gin\n[model]\neigenvalues = 5\n"); }).find("model.eigenvalues") !=
        std::string::npos);
  CHECK(error_of([] { parse_config("[dataset]\nkind = csl\n"); }).find("model.family") != std::string::npos);
  CHECK(error_of([] { parse_config("[model]\nfamily = gin\n"); }).find("dataset.kind") != std::string::npos);
  CHECK(error_of([] { parse_config("[model]\nfamily = mlp\n[dataset]\nkind = csl\n"); }).find("model.family") !=
        std::string::npos);
  CHECK(error_of([] { parse_config("preset = csl-gin\n[dataset]\npath = x\n"); }).find("dataset.path") !=
        std::string::npos);
  CHECK(error_of([] { parse_config("preset = csl-gin\n[extra]\n"); }).find("[extra]") != std::string::npos);
  CHECK(error_of([] { parse_config("preset = csl-gin\n[training]\nfolds = 1\n"); }).find("folds") != std::string::npos);
  CHECK(error_of([] { parse_config("preset = csl-gin\n[optimizer]\nlr = 1\nlr = 2\n"); }).find("duplicate") !=
        std::string::npos);
  CHECK(error_of([] { parse_config("preset = csl-gin\n[optimizer]\nlr = 1\nlr = 2\n"); }).find("config:4") !=
        std::string::npos);
}

TEST_CASE("config: a full file without a preset") {
  ExperimentConfig c = parse_config(R"(
name = tiny   # trailing comment
[dataset]
kind = tu
path = data/TINY
[model]
family = sgnn
operators = I, D, P0, P3
layers = 2
width = 4
power = within
[optimizer]
kind = sgd
lr = 0.5
clip = 2
[training]
epochs = 2
folds = 2
seeds = 0
protocol = fold-mean-epoch-max
)");
  CHECK(c.dataset.kind == DatasetSpec::Kind::kTu);
  CHECK(c.dataset.tu_path == "data/TINY");
  REQUIRE(c.model.sgnn.operators.size() == 4);
  CHECK(c.model.sgnn.operators[3].t == 3);
  CHECK(c.model.sgnn.power == PowerReading::kWithin);
  CHECK(c.optimizer == OptimizerKind::kSgd);
  CHECK(c.clip == 2.0);
  CHECK(c.protocol == Protocol::kFoldMeanEpochMax);
}

TEST_CASE("cli: success paths exit 0") {
  Run demo = cli("separator-demo");
  CHECK(demo.code == 0);
  CHECK(demo.out.find("G_{8,2} 64") != std::string::npos);
  CHECK(demo.out.find("G_{8,3} 32") != std::string::npos);

  const fs::path dir = scratch("cli");
  for (const std::string ext : {".json", ".txt"}) {
    const fs::path file = dir / ("g" + ext);
    CHECK(cli("gen-csl --n 11 --k 3 --out '" + file.string() + "'").code == 0);
    CHECK(read_graph_file(file.string()) == generate_csl(11, 3));
  }
  cli("gen-csl --n 8 --k 2 --out '" + (dir / "a.txt").string() + "'");
  cli("gen-csl --n 8 --k 3 --out '" + (dir / "b.txt").string() + "'");
  Run iso = cli("iso-test '" + (dir / "a.txt").string() + "' '" + (dir / "b.txt").string() + "'");
  CHECK(iso.code == 0);
  CHECK(iso.out.rfind("non-isomorphic", 0) == 0);
  Run same = cli("iso-test '" + (dir / "a.txt").string() + "' '" + (dir / "a.txt").string() + "'");
  CHECK(same.out.rfind("isomorphic", 0) == 0);
  Run wl = cli("wl-test '" + (dir / "a.txt").string() + "' '" + (dir / "b.txt").string() + "'");
  CHECK(wl.code == 0);
  CHECK(wl.out.rfind("indistinguishable", 0) == 0);

  CHECK(cli("verify-bases --n-max 5 --trials 5 --inputs 3").code == 0);
  Run tables = cli("verify-tables --n 8 --degree 4 --trials 2");
  CHECK(tables.code == 0);
  CHECK(tables.out.rfind("mu,tau,counter,closed_form,brute_force,match", 0) == 0);
  Run th = cli("verify-theorem --pairs 4 --draws 10");
  CHECK(th.code == 0);
  CHECK(th.out.find("max deviation") != std::string::npos);
  Run lab = cli("partition-lab --n 4 --families wl,spectrum");
  CHECK(lab.code == 0);
  CHECK(lab.out.find("iso,wl,equal") != std::string::npos);
  CHECK(cli("presets").out.find("csl-ring-gnn-svd") != std::string::npos);
  CHECK(cli("presets csl-gin").out.find("family = gin") != std::string::npos);
  Run tiny = cli("inspect-tu data/TINY");
  CHECK(tiny.code == 0);
  CHECK(tiny.out.find("2 graphs, 2 classes") != std::string::npos);
}

TEST_CASE("cli: train writes the run log and summary") {
  const fs::path dir = scratch("train");
  write(dir / "tiny.ini", "name = smoke\n[dataset]\nkind = tu\npath = data/TINY\n[model]\nfamily = gin\nlayers = 2\n"
                          "width = 4\n[training]\nepochs = 1\nfolds = 2\nseeds = 0\n");
  Run r = cli("train --config '" + (dir / "tiny.ini").string() + "' --out '" + (dir / "out").string() + "'");
  CHECK(r.code == 0);
  CHECK(r.out.find("model,dataset,runs,max,min,mean,std\nsmoke,TINY,2,") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "run_log.jsonl"));
  CHECK(slurp(dir / "out" / "summary.csv").rfind("model,dataset,runs,max,min,mean,std", 0) == 0);
}

TEST_CASE("cli: failure paths exit nonzero") {
  CHECK(cli("").code == 2);
  CHECK(cli("no-such-command").code == 2);
  CHECK(cli("separator-demo --bogus").code == 2);
  CHECK(cli("gen-csl --n 8").code == 2);
  CHECK(cli("gen-csl --n 8 --k 1").code == 2);
  CHECK(cli("iso-test /nonexistent/a /nonexistent/b").code == 2);
  CHECK(cli("train --config /nonexistent.ini").code == 2);
  CHECK(cli("inspect-tu /nonexistent").code == 2);
  CHECK(cli("partition-lab --n 7").code == 2);
  CHECK(cli("verify-theorem --pairs 2 --draws 2 --tol -1").code == 1);
  CHECK(cli("--help").code == 0);
}
