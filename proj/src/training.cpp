#include "ringgnn/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace ringgnn {

// ---------------------------------------------------------------- loss

Tensor cross_entropy(const Tensor& logits, int label) {
  const int classes = static_cast<int>(logits.size());
  if (logits.rank() != 1) throw DimensionError("cross_entropy: logits must be a vector, got " + shape_string(logits.shape()));
  if (label < 0 || label >= classes) {
    throw ParameterError("cross_entropy: label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
  }
  auto z = logits.values();
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> p(classes);
  double total = 0.0;
  for (int c = 0; c < classes; ++c) total += p[c] = std::exp(z[c] - top);
  for (double& e : p) e /= total;
  const double loss = std::log(total) + top - z[label];
  return Tensor::make_result({1}, {loss}, {logits}, [p, label](std::span<const double> g, std::vector<Tensor>& parents) {
    std::vector<double> d(p.size());
    for (std::size_t c = 0; c < p.size(); ++c) d[c] = g[0] * (p[c] - (static_cast<int>(c) == label ? 1.0 : 0.0));
    parents[0].accumulate_grad(d);
  });
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw ParameterError("argmax: empty input");
  const double top = *std::max_element(values.begin(), values.end());
  const double tol = 1e-9 * std::max(1.0, std::abs(top));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= top - tol) return static_cast<int>(i);
  }
  return 0;  // only reachable with NaN input
}

// ---------------------------------------------------------------- optimisers

void adam_step(std::vector<Parameter>& params, AdamState& state, const AdamOptions& o) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.tensor.size(), 0.0);
      state.v.emplace_back(p.tensor.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw UsageError("adam_step: state belongs to a different parameter set");
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto w = params[k].tensor.mutable_values();
    auto g = params[k].tensor.grad();
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      w[i] -= o.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + o.eps);
    }
  }
}

void sgd_step(std::vector<Parameter>& params, double lr) {
  for (auto& p : params) {
    auto w = p.tensor.mutable_values();
    auto g = p.tensor.grad();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
  }
}

// ---------------------------------------------------------------- splits

std::vector<Split> kfold_split(int size, int folds, std::uint64_t seed, std::span<const int> labels) {
  if (folds < 1) throw ParameterError("kfold_split: folds must be positive");
  if (folds > size) {
    throw ParameterError("kfold_split: " + std::to_string(folds) + " folds for " + std::to_string(size) + " items");
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != size) {
    throw DimensionError("kfold_split: " + std::to_string(labels.size()) + " labels for " + std::to_string(size) + " items");
  }
  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(size);
  if (labels.empty()) {
    std::vector<int> order(size);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    // Blocks of near-equal size, larger blocks first.
    for (int pos = 0; pos < size; ++pos) fold_of[order[pos]] = static_cast<int>(static_cast<long long>(pos) * folds / size);
  } else {
    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < size; ++i) by_class[labels[i]].push_back(i);
    // Dealing continues across classes so fold sizes stay within one.
    int next = 0;
    for (auto& [label, members] : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
      for (int i : members) {
        fold_of[i] = next;
        next = (next + 1) % folds;
      }
    }
  }
  std::vector<Split> out(folds);
  for (int i = 0; i < size; ++i) {
    for (int f = 0; f < folds; ++f) (f == fold_of[i] ? out[f].validation : out[f].train).push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------- models

std::string family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::kOrder2: return "order2";
    case ModelFamily::kRingGnn: return "ring-gnn";
    case ModelFamily::kSgnn: return "sgnn";
    case ModelFamily::kGin: return "gin";
  }
  return "?";
}

ModelFamily family_from_name(const std::string& name) {
  for (auto f : {ModelFamily::kOrder2, ModelFamily::kRingGnn, ModelFamily::kSgnn, ModelFamily::kGin}) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown model family '" + name + "' (expected order2, ring-gnn, sgnn or gin)");
}

void ModelSpec::set_classes(int classes) {
  order2.classes = ring.classes = sgnn.classes = gin.classes = classes;
}

int ModelSpec::classes() const {
  switch (family) {
    case ModelFamily::kOrder2: return order2.classes;
    case ModelFamily::kRingGnn: return ring.classes;
    case ModelFamily::kSgnn: return sgnn.classes;
    case ModelFamily::kGin: return gin.classes;
  }
  return 0;
}

ParameterSet init_model(const ModelSpec& spec, std::mt19937_64& rng) {
  switch (spec.family) {
    case ModelFamily::kOrder2: return init_order2(spec.order2, rng);
    case ModelFamily::kRingGnn: return init_ring_gnn(spec.ring, rng);
    case ModelFamily::kSgnn: return init_sgnn(spec.sgnn, rng);
    case ModelFamily::kGin: return init_gin(spec.gin, rng);
  }
  throw ParameterError("init_model: unknown family");
}

PreparedGraph prepare_for(const ModelSpec& spec, const Graph& g) {
  if (spec.family == ModelFamily::kSgnn) {
    return prepare_graph(g, spec.sgnn.operators, spec.sgnn.scale_operators, spec.sgnn.power);
  }
  return prepare_graph(g);
}

Tensor model_forward(const ModelSpec& spec, const PreparedGraph& g, const ParameterSet& params) {
  switch (spec.family) {
    case ModelFamily::kOrder2: return order2_forward(g, params, spec.order2);
    case ModelFamily::kRingGnn: return ring_gnn_forward(g, params, spec.ring);
    case ModelFamily::kSgnn: return sgnn_forward(g, params, spec.sgnn);
    case ModelFamily::kGin: return gin_forward(g, params, spec.gin);
  }
  throw ParameterError("model_forward: unknown family");
}

// ---------------------------------------------------------------- experiments

Dataset load_dataset(const DatasetSpec& spec) {
  return spec.kind == DatasetSpec::Kind::kCsl ? make_csl_dataset(spec.csl) : ingest_tu(spec.tu_path);
}

void ExperimentConfig::validate() const {
  if (folds < 2) throw ConfigError("folds: must be at least 2, got " + std::to_string(folds));
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (epochs < 1) throw ConfigError("epochs: must be positive");
  if (batch_size < 0) throw ConfigError("batch_size: must be non-negative");
  if (!(adam.lr > 0.0)) throw ConfigError("lr: must be positive");
  if (clip && !(*clip > 0.0)) throw ConfigError("clip: must be positive");
  if (threads < 1) throw ConfigError("threads: must be positive");
  if (dataset.kind == DatasetSpec::Kind::kTu && dataset.tu_path.empty()) throw ConfigError("path: required for tu datasets");
}

double FoldRun::final_val_acc() const { return epochs.empty() ? 0.0 : epochs.back().val_acc; }

double FoldRun::best_val_acc() const {
  double best = 0.0;
  for (const auto& e : epochs) best = std::max(best, e.val_acc);
  return best;
}

std::string Summary::csv_header() { return "model,dataset,runs,max,min,mean,std"; }

std::string Summary::csv_row() const {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << model << ',' << dataset << ',' << runs << ',' << max << ',' << min << ',' << mean << ',' << std;
  return os.str();
}

Summary aggregate(const std::vector<double>& accuracies, const std::string& model, const std::string& dataset) {
  if (accuracies.empty()) throw UsageError("aggregate: no completed runs");
  Summary s;
  s.model = model;
  s.dataset = dataset;
  s.runs = static_cast<int>(accuracies.size());
  s.max = *std::max_element(accuracies.begin(), accuracies.end());
  s.min = *std::min_element(accuracies.begin(), accuracies.end());
  s.mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / s.runs;
  double sq = 0.0;
  for (double a : accuracies) sq += (a - s.mean) * (a - s.mean);
  s.std = std::sqrt(sq / s.runs);
  return s;
}

std::vector<double> RunResult::run_accuracies() const {
  std::vector<double> out;
  if (protocol == Protocol::kFinal) {
    for (const auto& r : runs) {
      if (!r.failed) out.push_back(r.final_val_acc());
    }
    return out;
  }
  // Per seed: mean curve over the completed folds, then its maximum.
  std::map<std::uint64_t, std::vector<const FoldRun*>> by_seed;
  for (const auto& r : runs) {
    if (!r.failed) by_seed[r.seed].push_back(&r);
  }
  for (const auto& [seed, folds] : by_seed) {
    std::size_t length = folds.front()->epochs.size();
    for (const FoldRun* f : folds) length = std::min(length, f->epochs.size());
    double best = 0.0;
    for (std::size_t e = 0; e < length; ++e) {
      double mean = 0.0;
      for (const FoldRun* f : folds) mean += f->epochs[e].val_acc;
      best = std::max(best, mean / static_cast<double>(folds.size()));
    }
    out.push_back(best);
  }
  return out;
}

Summary RunResult::summary() const { return aggregate(run_accuracies(), model, dataset); }

std::string RunResult::jsonl() const {
  std::ostringstream os;
  for (const auto& r : runs) {
    for (const auto& e : r.epochs) {
      nlohmann::json j{{"seed", r.seed},         {"fold", r.fold},       {"epoch", e.epoch},
                       {"train_acc", e.train_acc}, {"val_acc", e.val_acc}, {"loss", e.loss}};
      os << j.dump() << '\n';
    }
    if (r.failed) {
      nlohmann::json j{{"seed", r.seed}, {"fold", r.fold}, {"failed", true}, {"diagnostic", r.diagnostic}};
      os << j.dump() << '\n';
    }
  }
  return os.str();
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Trains one (seed, fold) job on its own thread of control.
FoldRun train_one(const ExperimentConfig& cfg, const Dataset& data, const std::vector<PreparedGraph>& prepared,
                  const Split& split, std::uint64_t seed, int fold, const EpochCallback& on_epoch) {
  FoldRun run;
  run.seed = seed;
  run.fold = fold;
  std::seed_seq init_seq{seed, static_cast<std::uint64_t>(fold), std::uint64_t{0x9e3779b9}};
  std::mt19937_64 init_rng(init_seq);
  std::seed_seq order_seq{seed, static_cast<std::uint64_t>(fold), std::uint64_t{0x7f4a7c15}};
  std::mt19937_64 order_rng(order_seq);

  ParameterSet params = init_model(cfg.model, init_rng);
  AdamState adam;
  std::vector<int> order = split.train;
  const int batch = cfg.batch_size > 0 ? cfg.batch_size : static_cast<int>(order.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch));
      const double weight = 1.0 / static_cast<double>(end - start);
      params.zero_grad();
      for (std::size_t b = start; b < end; ++b) {
        const int idx = order[b];
        Tensor logits = model_forward(cfg.model, prepared[idx], params);
        Tensor loss = cross_entropy(logits, data.labels[idx]);
        const double value = loss.item();
        if (!std::isfinite(value)) {
          run.failed = true;
          run.diagnostic = "non-finite loss at epoch " + std::to_string(epoch) + " on graph " + std::to_string(idx);
          return run;
        }
        loss_sum += value;
        correct += argmax(logits.values()) == data.labels[idx] ? 1 : 0;
        scale(loss, weight).backward();
      }
      for (const auto& p : params.items()) {
        if (!all_finite(p.tensor.grad())) {
          run.failed = true;
          run.diagnostic = "non-finite gradient in " + p.name + " at epoch " + std::to_string(epoch);
          return run;
        }
      }
      if (cfg.clip) clip_gradients(params.items(), *cfg.clip);
      if (cfg.optimizer == OptimizerKind::kAdam) {
        adam_step(params.items(), adam, cfg.adam);
      } else {
        sgd_step(params.items(), cfg.adam.lr);
      }
    }

    int val_correct = 0;
    for (int idx : split.validation) {
      Tensor logits = model_forward(cfg.model, prepared[idx], params);
      if (!all_finite(logits.values())) {
        run.failed = true;
        run.diagnostic = "non-finite logits on validation graph " + std::to_string(idx) + " at epoch " + std::to_string(epoch);
        return run;
      }
      val_correct += argmax(logits.values()) == data.labels[idx] ? 1 : 0;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(order.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    rec.val_acc = static_cast<double>(val_correct) / static_cast<double>(split.validation.size());
    run.epochs.push_back(rec);
    if (on_epoch) on_epoch(run, rec);
  }
  return run;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  return run_experiment(cfg, load_dataset(cfg.dataset), on_epoch);
}

RunResult run_experiment(const ExperimentConfig& cfg_in, const Dataset& data, const EpochCallback& on_epoch) {
  cfg_in.validate();
  if (data.graphs.empty()) throw UsageError("run_experiment: empty dataset");
  ExperimentConfig cfg = cfg_in;
  cfg.model.set_classes(data.classes);

  std::vector<PreparedGraph> prepared;
  prepared.reserve(data.size());
  for (const auto& g : data.graphs) prepared.push_back(prepare_for(cfg.model, g));

  struct Job {
    std::uint64_t seed;
    int fold;
    Split split;
  };
  std::vector<Job> jobs;
  for (std::uint64_t seed : cfg.seeds) {
    auto splits = kfold_split(static_cast<int>(data.size()), cfg.folds, seed, data.labels);
    for (int f = 0; f < cfg.folds; ++f) jobs.push_back({seed, f, std::move(splits[f])});
  }

  RunResult result;
  result.model = cfg.name;
  result.dataset = data.name;
  result.protocol = cfg.protocol;
  result.runs.resize(jobs.size());

  // Each job is deterministic on its own, so the thread count never changes
  // the result.
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  EpochCallback guarded;
  if (on_epoch) {
    guarded = [&](const FoldRun& r, const EpochRecord& e) {
      std::lock_guard lock(callback_mutex);
      on_epoch(r, e);
    };
  }
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      result.runs[j] = train_one(cfg, data, prepared, jobs[j].split, jobs[j].seed, jobs[j].fold, guarded);
    }
  };
  const int threads = std::min<int>(cfg.threads, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return result;
}

void write_run_outputs(const RunResult& result, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  {
    std::ofstream log(fs::path(directory) / "run_log.jsonl");
    if (!log) throw UsageError("cannot write " + (fs::path(directory) / "run_log.jsonl").string());
    log << result.jsonl();
  }
  std::ofstream csv(fs::path(directory) / "summary.csv");
  if (!csv) throw UsageError("cannot write " + (fs::path(directory) / "summary.csv").string());
  csv << Summary::csv_header() << '\n';
  const auto accs = result.run_accuracies();
  if (!accs.empty()) csv << result.summary().csv_row() << '\n';
}

// ---------------------------------------------------------------- presets

namespace {

ExperimentConfig csl_base(const std::string& name, ModelFamily family) {
  ExperimentConfig c;
  c.name = name;
  c.dataset.kind = DatasetSpec::Kind::kCsl;
  c.model.family = family;
  c.folds = 5;
  c.seeds = {0, 1};  // 2 seeds x 5 folds = 10 runs
  c.batch_size = 16;
  c.protocol = Protocol::kFinal;
  return c;
}

ExperimentConfig imdb(const std::string& name, const std::string& path) {
  ExperimentConfig c;
  c.name = name;
  c.dataset.kind = DatasetSpec::Kind::kTu;
  c.dataset.tu_path = path;
  c.model.family = ModelFamily::kRingGnn;
  c.model.ring.widths = {1, 16, 16};
  c.model.ring.mlp_hidden = {64, 64};
  c.model.ring.normalize = true;
  c.model.ring.k1 = {0.0, 1.0};
  c.model.ring.k2 = {0.0, 0.01};
  c.adam.lr = 1e-5;
  c.epochs = 350;
  c.batch_size = 32;
  c.folds = 10;
  c.seeds = {0};
  c.protocol = Protocol::kFoldMeanEpochMax;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"csl-ring-gnn", "csl-ring-gnn-svd", "csl-sgnn-1", "csl-sgnn-2", "csl-sgnn-5",
          "csl-gin",      "csl-order2",       "imdbb-ring-gnn", "imdbm-ring-gnn"};
}

ExperimentConfig preset(const std::string& name) {
  if (name == "csl-ring-gnn") {
    auto c = csl_base("Ring-GNN", ModelFamily::kRingGnn);
    c.model.ring.widths = {1, 8, 8};
    c.model.ring.mlp_hidden = {64, 64};
    c.model.ring.normalize = true;
    c.model.ring.k1 = {0.0, 1.0};
    c.model.ring.k2 = {0.0, 0.01};
    c.adam.lr = 1e-4;
    c.epochs = 300;
    return c;
  }
  if (name == "csl-ring-gnn-svd") {
    auto c = csl_base("Ring-GNN-SVD", ModelFamily::kRingGnn);
    c.model.ring.widths = {1, 4, 8};
    c.model.ring.mlp_hidden = {64, 64};
    c.model.ring.normalize = true;
    c.model.ring.use_eigenvalues = true;
    c.model.ring.num_eigenvalues = 5;
    c.model.ring.eigen_method = EighMethod::kTridiagonal;
    c.model.ring.k1 = {0.0, 0.5};
    c.model.ring.k2 = {0.0, 0.005};
    c.adam.lr = 1e-3;
    c.epochs = 1000;
    c.clip = 1.0;
    return c;
  }
  for (int i : {1, 2, 5}) {
    if (name == "csl-sgnn-" + std::to_string(i)) {
      auto c = csl_base("sGNN-" + std::to_string(i), ModelFamily::kSgnn);
      c.model.sgnn.operators = sgnn_family(i);
      c.model.sgnn.layers = 5;
      c.model.sgnn.width = 64;
      c.adam.lr = 0.01;
      c.epochs = 100;
      return c;
    }
  }
  if (name == "csl-gin") {
    auto c = csl_base("GIN", ModelFamily::kGin);
    c.model.gin.layers = 5;
    c.model.gin.width = 64;
    c.adam.lr = 0.01;
    c.epochs = 50;
    return c;
  }
  if (name == "csl-order2") {
    auto c = csl_base("Order 2 G-invariant", ModelFamily::kOrder2);
    c.model.order2.widths = {1, 16, 16};
    c.model.order2.mlp_hidden = {64, 64};
    c.model.order2.normalize = true;
    c.adam.lr = 1e-3;
    c.epochs = 20;
    return c;
  }
  if (name == "imdbb-ring-gnn") return imdb("Ring-GNN", "data/IMDB-BINARY");
  if (name == "imdbm-ring-gnn") return imdb("Ring-GNN", "data/IMDB-MULTI");
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace ringgnn
