#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ringgnn/dataset.hpp"
#include "ringgnn/models.hpp"
#include "ringgnn/tensor.hpp"

namespace ringgnn {

// ---- losses and prediction ----

// -log softmax(logits)[label], computed with max subtraction.
Tensor cross_entropy(const Tensor& logits, int label);

// Index of the largest value. Values within 1e-9 * max(1, |max|) of the
// maximum count as ties and the lowest index wins, so identical logits
// always predict class 0.
int argmax(std::span<const double> values);

// ---- optimisers ----

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m, v;
  long long step = 0;
};

// One Adam update from the gradients currently stored on `params`.
// The state is sized on first use.
void adam_step(std::vector<Parameter>& params, AdamState& state, const AdamOptions& options);

// p <- p - lr * grad
void sgd_step(std::vector<Parameter>& params, double lr);

// ---- cross validation ----

struct Split {
  std::vector<int> train;
  std::vector<int> validation;
};

// Deterministic shuffled k-fold partition of [0, size). With labels, each
// class is shuffled and dealt round robin so every fold gets a near-equal
// share of every class. Index lists are sorted.
std::vector<Split> kfold_split(int size, int folds, std::uint64_t seed, std::span<const int> labels = {});

// ---- model dispatch ----

enum class ModelFamily { kOrder2, kRingGnn, kSgnn, kGin };

std::string family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);

struct ModelSpec {
  ModelFamily family = ModelFamily::kRingGnn;
  Order2Config order2;
  RingGnnConfig ring;
  SgnnConfig sgnn;
  GinConfig gin;

  void set_classes(int classes);
  int classes() const;
};

ParameterSet init_model(const ModelSpec& spec, std::mt19937_64& rng);
PreparedGraph prepare_for(const ModelSpec& spec, const Graph& g);
Tensor model_forward(const ModelSpec& spec, const PreparedGraph& g, const ParameterSet& params);

// ---- experiments ----

struct DatasetSpec {
  enum class Kind { kCsl, kTu };
  Kind kind = Kind::kCsl;
  CslSpec csl;
  std::string tu_path;
};

Dataset load_dataset(const DatasetSpec& spec);

enum class OptimizerKind { kAdam, kSgd };

// How runs are reduced to one accuracy each before max/min/mean/std.
enum class Protocol {
  kFinal,              // final-epoch validation accuracy of every run
  kFoldMeanEpochMax,   // per seed: average over folds, then best epoch
};

struct ExperimentConfig {
  std::string name = "experiment";  // model label in the summary
  DatasetSpec dataset;
  ModelSpec model;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AdamOptions adam;  // adam.lr doubles as the SGD learning rate
  int epochs = 100;
  int batch_size = 0;  // 0 = full batch
  int folds = 5;
  std::vector<std::uint64_t> seeds{0, 1};
  std::optional<double> clip;
  Protocol protocol = Protocol::kFinal;
  int threads = 1;

  // Throws ConfigError naming the offending field.
  void validate() const;
  int run_count() const { return static_cast<int>(seeds.size()) * folds; }
};

struct EpochRecord {
  int epoch = 0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double loss = 0.0;
};

// One (seed, fold) job.
struct FoldRun {
  std::uint64_t seed = 0;
  int fold = 0;
  bool failed = false;
  std::string diagnostic;
  std::vector<EpochRecord> epochs;

  double final_val_acc() const;
  double best_val_acc() const;
};

struct Summary {
  std::string model;
  std::string dataset;
  int runs = 0;
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation

  static std::string csv_header();  // model,dataset,runs,max,min,mean,std
  std::string csv_row() const;
};

// Max, min, mean and std of per-run accuracies. Throws UsageError if empty.
Summary aggregate(const std::vector<double>& accuracies, const std::string& model = "",
                  const std::string& dataset = "");

struct RunResult {
  std::string model;
  std::string dataset;
  Protocol protocol = Protocol::kFinal;
  std::vector<FoldRun> runs;  // seed-major, then fold

  // Per-run accuracies under `protocol`; failed runs are skipped.
  std::vector<double> run_accuracies() const;
  // Throws UsageError when no run completed.
  Summary summary() const;
  // One JSON object per epoch: {seed, fold, epoch, train_acc, val_acc, loss};
  // a failed run adds {seed, fold, failed, diagnostic}.
  std::string jsonl() const;
};

// Called after every epoch of every job (from the job's thread).
using EpochCallback = std::function<void(const FoldRun& run, const EpochRecord& record)>;

RunResult run_experiment(const ExperimentConfig& cfg, const EpochCallback& on_epoch = {});
RunResult run_experiment(const ExperimentConfig& cfg, const Dataset& data, const EpochCallback& on_epoch = {});

// Writes run_log.jsonl and summary.csv into `directory` (created if needed).
void write_run_outputs(const RunResult& result, const std::string& directory);

// ---- shipped recipes ----

std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name.
ExperimentConfig preset(const std::string& name);

}  // namespace ringgnn
