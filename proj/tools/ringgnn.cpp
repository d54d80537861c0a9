// Command-line front end. Exit codes: 0 success, 1 a verification or run
// failed, 2 bad usage or unreadable input.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "ringgnn/config.hpp"
#include "ringgnn/dataset.hpp"
#include "ringgnn/equivariant.hpp"
#include "ringgnn/expressivity.hpp"
#include "ringgnn/graph.hpp"
#include "ringgnn/graph_ops.hpp"
#include "ringgnn/models.hpp"
#include "ringgnn/training.hpp"
#include "ringgnn/verify.hpp"

using namespace ringgnn;

namespace {

constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_suite(const SuiteResult& r) {
  std::cout << r.name << ": " << (r.passed ? "PASS" : "FAIL") << "  max deviation " << r.max_deviation << " (tol "
            << r.tolerance << "), " << r.checks << " checks";
  if (!r.passed) std::cout << "  [" << r.detail << "]";
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant graph network expressivity lab"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // gen-csl
  auto* gen = app.add_subcommand("gen-csl", "Write the circular skip-link graph G_{n,k}");
  int gen_n = 0, gen_k = 0;
  std::string gen_out, gen_format = "auto";
  gen->add_option("--n", gen_n, "Number of nodes")->required();
  gen->add_option("--k", gen_k, "Skip length")->required();
  gen->add_option("--out", gen_out, "Output file (default: stdout)");
  gen->add_option("--format", gen_format, "edges, json, or auto (json when --out ends in .json)")
      ->check(CLI::IsMember({"auto", "edges", "json"}));

  // iso-test / wl-test
  auto* iso = app.add_subcommand("iso-test", "Exact isomorphism test of two graph files");
  std::string g1_path, g2_path;
  iso->add_option("g1", g1_path, "First graph (edge list or JSON)")->required();
  iso->add_option("g2", g2_path, "Second graph")->required();
  auto* wl = app.add_subcommand("wl-test", "1-WL colour refinement on two graph files");
  wl->add_option("g1", g1_path, "First graph (edge list or JSON)")->required();
  wl->add_option("g2", g2_path, "Second graph")->required();

  // verify-bases
  auto* vb = app.add_subcommand("verify-bases", "Closed-form bases against the naive sum, and equivariance");
  int vb_n_max = 8, vb_n_min = 4, vb_trials = 100, vb_inputs = 20;
  std::uint64_t vb_seed = 0;
  vb->add_option("--n-max", vb_n_max, "Largest n")->check(CLI::Range(1, 64));
  vb->add_option("--n-min", vb_n_min, "Smallest n for the equivariance suite")->check(CLI::Range(1, 64));
  vb->add_option("--trials", vb_trials, "Random (x, pi) per n")->check(CLI::PositiveNumber);
  vb->add_option("--inputs", vb_inputs, "Random inputs per n for the closed forms")->check(CLI::PositiveNumber);
  vb->add_option("--seed", vb_seed, "Random seed");

  // verify-tables
  auto* vt = app.add_subcommand("verify-tables", "Brute-force count tables on sampled regular graphs");
  int vt_n = 8, vt_degree = 4, vt_trials = 1;
  std::uint64_t vt_seed = 0;
  vt->add_option("--n", vt_n, "Number of nodes")->required();
  vt->add_option("--degree", vt_degree, "Degree")->required();
  vt->add_option("--trials", vt_trials, "Graphs to sample")->check(CLI::PositiveNumber);
  vt->add_option("--seed", vt_seed, "Seed of the first graph");

  // verify-theorem
  auto* vth = app.add_subcommand("verify-theorem", "Order-2 networks on same-degree regular pairs");
  int th_pairs = 20, th_draws = 1000;
  double th_tol = 1e-8;
  std::uint64_t th_seed = 0;
  vth->add_option("--pairs", th_pairs, "Graph pairs")->check(CLI::PositiveNumber);
  vth->add_option("--draws", th_draws, "Random networks")->check(CLI::PositiveNumber);
  vth->add_option("--tol", th_tol, "Relative tolerance");
  vth->add_option("--seed", th_seed, "Random seed");

  // partition-lab
  auto* lab = app.add_subcommand("partition-lab", "Compare the partitions induced by invariant families");
  int lab_n = 5;
  std::string lab_families;
  bool lab_reps = false;
  std::uint64_t lab_seed = 0;
  lab->add_option("--n", lab_n, "Nodes (full enumeration up to 6; 7 needs --representatives)")->check(CLI::Range(1, 7));
  lab->add_option("--families", lab_families, "Comma-separated families (default: all)");
  lab->add_flag("--representatives", lab_reps, "One graph per isomorphism class");
  lab->add_option("--seed", lab_seed, "Seed of the random-network families");

  // train
  auto* train = app.add_subcommand("train", "Run an experiment from a config file or preset name");
  std::string train_config, train_out;
  int train_threads = 0, train_epochs = 0;
  train->add_option("--config", train_config, "Config file or preset name")->required();
  train->add_option("--out", train_out, "Directory for run_log.jsonl and summary.csv");
  train->add_option("--threads", train_threads, "Override the worker count")->check(CLI::PositiveNumber);
  train->add_option("--epochs", train_epochs, "Override the epoch count")->check(CLI::PositiveNumber);

  app.add_subcommand("separator-demo", "Hand-built Ring-GNN on G_{8,2} and G_{8,3}");

  auto* tu = app.add_subcommand("inspect-tu", "Load a TU-format dataset and print its shape");
  std::string tu_dir;
  tu->add_option("dir", tu_dir, "Dataset directory")->required();

  auto* presets = app.add_subcommand("presets", "List presets, or print one as a config file");
  std::string preset_name;
  presets->add_option("name", preset_name, "Preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) {
      const Graph g = generate_csl(gen_n, gen_k);
      const bool json = gen_format == "json" || (gen_format == "auto" && gen_out.ends_with(".json"));
      const std::string text = json ? to_json(g) + "\n" : to_edge_list(g);
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(gen_out);
        if (!(out << text)) throw UsageError("cannot write " + gen_out);
      }
      return 0;
    }
    if (*iso) {
      const Graph a = read_graph_file(g1_path), b = read_graph_file(g2_path);
      std::cout << (are_isomorphic(a, b) ? "isomorphic" : "non-isomorphic") << '\n';
      return 0;
    }
    if (*wl) {
      const Graph a = read_graph_file(g1_path), b = read_graph_file(g2_path);
      std::cout << (wl_distinguishes(a, b) ? "distinguished" : "indistinguishable") << '\n';
      std::cout << "g1 " << to_json(wl_refine(a)) << '\n' << "g2 " << to_json(wl_refine(b)) << '\n';
      return 0;
    }
    if (*vb) {
      const SuiteResult closed = verify_basis_closed_forms(vb_n_max, vb_inputs, vb_seed);
      const SuiteResult eq = verify_equivariance(std::min(vb_n_min, vb_n_max), vb_n_max, vb_trials, vb_seed + 1);
      print_suite(closed);
      print_suite(eq);
      return closed.passed && eq.passed ? 0 : kFailure;
    }
    if (*vt) {
      bool ok = true;
      for (int t = 0; t < vt_trials; ++t) {
        const CountTableReport r = compute_count_tables(vt_n, vt_degree, vt_seed + t);
        std::string csv = r.to_csv();
        if (t > 0) csv = csv.substr(csv.find('\n') + 1);
        std::cout << csv;
        if (!r.all_match()) {
          ok = false;
          std::cerr << "mismatch on the graph with seed " << vt_seed + t << '\n';
        }
      }
      return ok ? 0 : kFailure;
    }
    if (*vth) {
      const SuiteResult r = verify_regular_theorem(th_pairs, th_draws, th_seed, th_tol);
      std::cout << "pairs " << th_pairs << ", draws " << th_draws << '\n';
      std::cout << "max deviation " << r.max_deviation << " (tol " << th_tol << ")\n";
      if (!r.passed) std::cout << r.detail << '\n';
      return r.passed ? 0 : kFailure;
    }
    if (*lab) {
      Figure1Options opts;
      opts.families = split_commas(lab_families);
      opts.representatives_only = lab_reps;
      opts.seed = lab_seed;
      const Figure1Report r = figure1_report(lab_n, opts);
      for (std::size_t i = 0; i < r.partitions.size(); ++i) {
        std::cerr << r.partitions[i].source << ": " << r.partitions[i].block_count << " blocks"
                  << (r.lower_bound[i] ? " (random draws: separations are exact, merges are only evidence)" : "")
                  << '\n';
      }
      std::cout << r.to_csv();
      return 0;
    }
    if (*train) {
      ExperimentConfig cfg = load_config(train_config);
      if (train_threads > 0) cfg.threads = train_threads;
      if (train_epochs > 0) cfg.epochs = train_epochs;
      std::mutex io;
      const RunResult result = run_experiment(cfg, [&](const FoldRun& run, const EpochRecord& e) {
        if (e.epoch != cfg.epochs) return;
        std::lock_guard lock(io);
        std::cerr << "seed " << run.seed << " fold " << run.fold << ": val_acc " << e.val_acc << " loss " << e.loss << '\n';
      });
      for (const auto& run : result.runs) {
        if (run.failed) std::cerr << "seed " << run.seed << " fold " << run.fold << " failed: " << run.diagnostic << '\n';
      }
      if (!train_out.empty()) write_run_outputs(result, train_out);
      if (result.run_accuracies().empty()) {
        std::cerr << "every run failed\n";
        return kFailure;
      }
      std::cout << Summary::csv_header() << '\n' << result.summary().csv_row() << '\n';
      return 0;
    }
    if (app.got_subcommand("separator-demo")) {
      const Separator s = construct_separator();
      std::cout << "G_{8,2} " << ring_gnn_forward(generate_csl(8, 2), s.params, s.config).item() << '\n';
      std::cout << "G_{8,3} " << ring_gnn_forward(generate_csl(8, 3), s.params, s.config).item() << '\n';
      return 0;
    }
    if (*tu) {
      const Dataset d = ingest_tu(tu_dir);
      std::cout << d.name << ": " << d.size() << " graphs, " << d.classes << " classes, mean nodes " << d.mean_nodes()
                << '\n';
      return 0;
    }
    if (*presets) {
      if (preset_name.empty()) {
        for (const auto& n : preset_names()) std::cout << n << '\n';
      } else {
        std::cout << config_to_text(preset(preset_name));
      }
      return 0;
    }
  } catch (const VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return kFailure;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const RetryExhaustedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
