#include "ringgnn/models.hpp"

#include <cmath>

#include "ringgnn/equivariant.hpp"
#include "ringgnn/graph_ops.hpp"

namespace ringgnn {

namespace {

std::vector<double> normal_values(std::size_t count, double mean, double std, std::mt19937_64& rng) {
  std::vector<double> v(count, mean);
  if (std > 0.0) {
    std::normal_distribution<double> dist(mean, std);
    for (double& e : v) e = dist(rng);
  }
  return v;
}

// He-style normal initialisation for a weight with the given fan-in.
Tensor add_weight(ParameterSet& ps, const std::string& name, Shape shape, int fan_in, std::mt19937_64& rng) {
  const double std = std::sqrt(2.0 / std::max(1, fan_in));
  return ps.add(name, shape, normal_values(shape_size(shape), 0.0, std, rng));
}

void add_theta(ParameterSet& ps, const std::string& name, int d_in, int d_out, std::mt19937_64& rng) {
  add_weight(ps, name, {d_in, d_out, kLayerWeights}, d_in * kLayerWeights, rng);
}

void add_mlp(ParameterSet& ps, int in, const std::vector<int>& hidden, int out, std::mt19937_64& rng) {
  int width = in;
  int i = 0;
  for (int h : hidden) {
    add_weight(ps, "head.w" + std::to_string(i), {width, h}, width, rng);
    ps.add_zeros("head.b" + std::to_string(i), {h});
    width = h;
    ++i;
  }
  add_weight(ps, "head.w" + std::to_string(i), {width, out}, width, rng);
  ps.add_zeros("head.b" + std::to_string(i), {out});
}

Tensor mlp(Tensor x, const ParameterSet& ps, std::size_t hidden_layers) {
  x = reshape(x, {1, static_cast<int>(x.size())});
  for (std::size_t i = 0; i <= hidden_layers; ++i) {
    x = affine(x, ps.get("head.w" + std::to_string(i)), ps.get("head.b" + std::to_string(i)));
    if (i < hidden_layers) x = relu(x);
  }
  return reshape(x, {static_cast<int>(x.size())});
}

void check_channels(const PreparedGraph& g, int expected, const char* model) {
  if (g.input.dim(0) != expected) {
    throw DimensionError(std::string(model) + ": graph has " + std::to_string(g.input.dim(0)) +
                         " channels, config expects " + std::to_string(expected));
  }
}

// Per-channel sum of all entries and of the diagonal.
Tensor sum_features(const Tensor& a, int n, bool normalize) {
  Tensor all = reduce(ReduceKind::kSumAll, a);
  Tensor diag = reduce(ReduceKind::kSumDiag, a);
  if (normalize) {
    all = scale(all, 1.0 / (static_cast<double>(n) * n));
    diag = scale(diag, 1.0 / n);
  }
  return concat({all, diag});
}

int feature_count(const RingGnnConfig& cfg, int n_hint) {
  const int d = cfg.widths.back();
  int f = 2 * d;
  if (cfg.use_eigenvalues) f += d * (cfg.num_eigenvalues > 0 ? cfg.num_eigenvalues : n_hint);
  return f;
}

void validate_widths(const std::vector<int>& widths, const char* model) {
  if (widths.size() < 2) throw ParameterError(std::string(model) + ": need at least one layer");
  for (int w : widths) {
    if (w < 1) throw ParameterError(std::string(model) + ": channel widths must be positive");
  }
}

}  // namespace

std::string SgnnOperator::name() const {
  switch (kind) {
    case SgnnOperatorKind::kIdentity: return "I";
    case SgnnOperatorKind::kDegree: return "D";
    case SgnnOperatorKind::kPower: return "P" + std::to_string(t);
  }
  return "?";
}

std::vector<SgnnOperator> sgnn_family(int i) {
  if (i < 0) throw ParameterError("sgnn_family: i must be non-negative");
  std::vector<SgnnOperator> ops{{SgnnOperatorKind::kIdentity, 0}, {SgnnOperatorKind::kDegree, 0}};
  for (int t = 0; t < i; ++t) ops.push_back({SgnnOperatorKind::kPower, t});
  return ops;
}

PreparedGraph prepare_graph(const Graph& g, const std::vector<SgnnOperator>& operators, bool scale_operators,
                            PowerReading power) {
  PreparedGraph p;
  const int n = g.n(), c = g.channels();
  p.n = n;
  std::vector<double> input(static_cast<std::size_t>(c) * n * n);
  for (int k = 0; k < c; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) input[(static_cast<std::size_t>(k) * n + i) * n + j] = g.at(i, j, k);
  p.input = Tensor::from_values({c, n, n}, std::move(input));
  p.adjacency = adjacency_tensor(g);
  for (const auto& op : operators) {
    Tensor m;
    switch (op.kind) {
      case SgnnOperatorKind::kIdentity: m = Tensor::identity(n); break;
      case SgnnOperatorKind::kDegree: m = degree_matrix(g); break;
      case SgnnOperatorKind::kPower:
        m = adjacency_tensor(power == PowerReading::kExact ? power_graph(g, op.t) : reach_graph(g, op.t));
        break;
    }
    p.operators.push_back(scale_operators ? scale(m, 1.0 / n) : m);
  }
  return p;
}

// ---------------------------------------------------------------- init

ParameterSet init_order2(const Order2Config& cfg, std::mt19937_64& rng) {
  validate_widths(cfg.widths, "order2");
  ParameterSet ps;
  for (std::size_t t = 0; t + 1 < cfg.widths.size(); ++t) {
    add_theta(ps, "layer" + std::to_string(t) + ".theta", cfg.widths[t], cfg.widths[t + 1], rng);
  }
  add_mlp(ps, 2 * cfg.widths.back(), cfg.mlp_hidden, cfg.classes, rng);
  return ps;
}

ParameterSet init_ring_gnn(const RingGnnConfig& cfg, std::mt19937_64& rng) {
  validate_widths(cfg.widths, "ring_gnn");
  if (cfg.use_eigenvalues && cfg.num_eigenvalues < 1) {
    throw ParameterError("ring_gnn: the eigenvalue readout needs a fixed num_eigenvalues >= 1");
  }
  ParameterSet ps;
  for (std::size_t t = 0; t + 1 < cfg.widths.size(); ++t) {
    const std::string p = "ring" + std::to_string(t) + ".";
    add_theta(ps, p + "alpha", cfg.widths[t], cfg.widths[t + 1], rng);
    add_theta(ps, p + "beta", cfg.widths[t], cfg.widths[t + 1], rng);
    add_theta(ps, p + "gamma", cfg.widths[t], cfg.widths[t + 1], rng);
    ps.add(p + "k1", {1}, normal_values(1, cfg.k1.mean, cfg.k1.std, rng));
    ps.add(p + "k2", {1}, normal_values(1, cfg.k2.mean, cfg.k2.std, rng));
  }
  add_mlp(ps, feature_count(cfg, 0), cfg.mlp_hidden, cfg.classes, rng);
  return ps;
}

ParameterSet init_sgnn(const SgnnConfig& cfg, std::mt19937_64& rng) {
  if (cfg.operators.empty()) throw ParameterError("sgnn: operator family must be nonempty");
  if (cfg.layers < 1 || cfg.width < 1) throw ParameterError("sgnn: layers and width must be positive");
  ParameterSet ps;
  for (int t = 0; t < cfg.layers; ++t) {
    const int d_in = t == 0 ? 1 : cfg.width;
    for (const auto& op : cfg.operators) {
      add_weight(ps, "sgnn" + std::to_string(t) + "." + op.name(), {d_in, cfg.width},
                 d_in * static_cast<int>(cfg.operators.size()), rng);
    }
  }
  add_mlp(ps, cfg.width, {}, cfg.classes, rng);
  return ps;
}

ParameterSet init_gin(const GinConfig& cfg, std::mt19937_64& rng) {
  if (cfg.layers < 1 || cfg.width < 1) throw ParameterError("gin: layers and width must be positive");
  ParameterSet ps;
  for (int t = 0; t < cfg.layers; ++t) {
    const std::string p = "gin" + std::to_string(t) + ".";
    const int d_in = t == 0 ? 1 : cfg.width;
    add_weight(ps, p + "w0", {d_in, cfg.width}, d_in, rng);
    ps.add_zeros(p + "b0", {cfg.width});
    add_weight(ps, p + "w1", {cfg.width, cfg.width}, cfg.width, rng);
    ps.add_zeros(p + "b1", {cfg.width});
  }
  add_mlp(ps, cfg.width, {}, cfg.classes, rng);
  return ps;
}

// ---------------------------------------------------------------- forward

Tensor order2_forward(const PreparedGraph& g, const ParameterSet& params, const Order2Config& cfg) {
  check_channels(g, cfg.widths.front(), "order2");
  Tensor a = g.input;
  for (std::size_t t = 0; t + 1 < cfg.widths.size(); ++t) {
    a = relu(equivariant_layer(a, params.get("layer" + std::to_string(t) + ".theta"), cfg.normalize));
  }
  return mlp(sum_features(a, g.n, cfg.normalize), params, cfg.mlp_hidden.size());
}

Tensor ring_gnn_features(const PreparedGraph& g, const ParameterSet& params, const RingGnnConfig& cfg) {
  check_channels(g, cfg.widths.front(), "ring_gnn");
  const int n = g.n;
  Tensor a = g.input;
  for (std::size_t t = 0; t + 1 < cfg.widths.size(); ++t) {
    const std::string p = "ring" + std::to_string(t) + ".";
    Tensor b1 = relu(equivariant_layer(a, params.get(p + "alpha"), cfg.normalize));
    Tensor prod = batched_matmul(equivariant_layer(a, params.get(p + "beta"), cfg.normalize),
                                 equivariant_layer(a, params.get(p + "gamma"), cfg.normalize));
    if (cfg.normalize) prod = scale(prod, 1.0 / n);
    Tensor b2 = relu(prod);
    a = add(scale(b1, params.get(p + "k1")), scale(b2, params.get(p + "k2")));
  }
  Tensor features = sum_features(a, n, cfg.normalize);
  if (!cfg.use_eigenvalues) return features;

  const int m = cfg.num_eigenvalues > 0 ? cfg.num_eigenvalues : n;
  if (m > n) {
    throw ParameterError("ring_gnn: num_eigenvalues = " + std::to_string(m) + " exceeds n = " + std::to_string(n));
  }
  std::vector<Tensor> parts{features};
  EighOptions opts;
  opts.method = cfg.eigen_method;
  for (int k = 0; k < a.dim(0); ++k) {
    Eigh e = sym_eigh(symmetrize(select(a, k)), opts);
    Tensor top = slice(e.values, 0, m);
    parts.push_back(top);
  }
  return concat(parts);
}

Tensor ring_gnn_forward(const PreparedGraph& g, const ParameterSet& params, const RingGnnConfig& cfg) {
  return mlp(ring_gnn_features(g, params, cfg), params, cfg.mlp_hidden.size());
}

std::vector<Tensor> sgnn_node_states(const PreparedGraph& g, const ParameterSet& params, const SgnnConfig& cfg) {
  if (g.operators.size() != cfg.operators.size()) {
    throw DimensionError("sgnn: graph was prepared with " + std::to_string(g.operators.size()) +
                         " operators, config has " + std::to_string(cfg.operators.size()));
  }
  std::vector<Tensor> states{Tensor::full({g.n, 1}, 1.0)};
  for (int t = 0; t < cfg.layers; ++t) {
    Tensor acc;
    for (std::size_t m = 0; m < cfg.operators.size(); ++m) {
      const Tensor& theta = params.get("sgnn" + std::to_string(t) + "." + cfg.operators[m].name());
      Tensor term = matmul(g.operators[m], matmul(states.back(), theta));
      acc = acc.defined() ? add(acc, term) : term;
    }
    states.push_back(relu(acc));
  }
  return states;
}

Tensor sgnn_forward(const PreparedGraph& g, const ParameterSet& params, const SgnnConfig& cfg) {
  return mlp(sum_rows(sgnn_node_states(g, params, cfg).back()), params, 0);
}

std::vector<Tensor> gin_node_states(const PreparedGraph& g, const ParameterSet& params, const GinConfig& cfg) {
  std::vector<Tensor> states{Tensor::full({g.n, 1}, 1.0)};
  for (int t = 0; t < cfg.layers; ++t) {
    const std::string p = "gin" + std::to_string(t) + ".";
    const Tensor& h = states.back();
    Tensor z = add(scale(h, 1.0 + cfg.epsilon), matmul(g.adjacency, h));
    Tensor hidden = relu(affine(z, params.get(p + "w0"), params.get(p + "b0")));
    states.push_back(relu(affine(hidden, params.get(p + "w1"), params.get(p + "b1"))));
  }
  return states;
}

Tensor gin_forward(const PreparedGraph& g, const ParameterSet& params, const GinConfig& cfg) {
  return mlp(sum_rows(gin_node_states(g, params, cfg).back()), params, 0);
}

Tensor order2_forward(const Graph& g, const ParameterSet& params, const Order2Config& cfg) {
  return order2_forward(prepare_graph(g), params, cfg);
}
Tensor ring_gnn_forward(const Graph& g, const ParameterSet& params, const RingGnnConfig& cfg) {
  return ring_gnn_forward(prepare_graph(g), params, cfg);
}
Tensor sgnn_forward(const Graph& g, const ParameterSet& params, const SgnnConfig& cfg) {
  return sgnn_forward(prepare_graph(g, cfg.operators, cfg.scale_operators, cfg.power), params, cfg);
}
Tensor gin_forward(const Graph& g, const ParameterSet& params, const GinConfig& cfg) {
  return gin_forward(prepare_graph(g), params, cfg);
}

// ---------------------------------------------------------------- separator

Separator construct_separator() {
  Separator s;
  s.config.widths = {1, 1, 2};
  s.config.mlp_hidden = {};
  s.config.classes = 1;
  s.config.normalize = false;

  const int copy_off = mu_index(MuClass{{1, 2, 1, 2}});
  const int copy_diag = mu_index(MuClass{{1, 1, 1, 1}});
  auto theta = [&](int d_out) { return std::vector<double>(static_cast<std::size_t>(d_out) * kLayerWeights, 0.0); };

  // Layer 0: B2 = ReLU(A * A) = A^2; k1 = 0, k2 = 1.
  auto identity1 = theta(1);
  identity1[copy_off] = identity1[copy_diag] = 1.0;
  s.params.add("ring0.alpha", {1, 1, kLayerWeights}, theta(1));
  s.params.add("ring0.beta", {1, 1, kLayerWeights}, identity1);
  s.params.add("ring0.gamma", {1, 1, kLayerWeights}, identity1);
  s.params.add("ring0.k1", {1}, {0.0});
  s.params.add("ring0.k2", {1}, {1.0});

  // Layer 1: channel 0 = ReLU(A^2), channel 1 = ReLU(A^2 - J); k1 = 1, k2 = 0.
  auto alpha = theta(2);
  alpha[copy_off] = alpha[copy_diag] = 1.0;
  alpha[kLayerWeights + copy_off] = alpha[kLayerWeights + copy_diag] = 1.0;
  alpha[kLayerWeights + kBasisCount] = -1.0;      // off-diagonal ones
  alpha[kLayerWeights + kBasisCount + 1] = -1.0;  // identity
  s.params.add("ring1.alpha", {1, 2, kLayerWeights}, alpha);
  s.params.add("ring1.beta", {1, 2, kLayerWeights}, theta(2));
  s.params.add("ring1.gamma", {1, 2, kLayerWeights}, theta(2));
  s.params.add("ring1.k1", {1}, {1.0});
  s.params.add("ring1.k2", {1}, {0.0});

  // Readout: sum_all(ch0) - sum_all(ch1) = sum of min(A^2, 1).
  // Features are [sum_all ch0, sum_all ch1, sum_diag ch0, sum_diag ch1].
  s.params.add("head.w0", {4, 1}, {1.0, -1.0, 0.0, 0.0});
  s.params.add("head.b0", {1}, {0.0});
  return s;
}

}  // namespace ringgnn
