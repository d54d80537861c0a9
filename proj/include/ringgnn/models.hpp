#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ringgnn/graph.hpp"
#include "ringgnn/tensor.hpp"

namespace ringgnn {

// Normal initialiser; std = 0 gives a constant.
struct InitSpec {
  double mean = 0.0;
  double std = 0.0;
};

// Order-2 G-invariant network: A <- ReLU(L(A)) per layer, per-channel sums
// of all entries and of the diagonal, then an MLP.
struct Order2Config {
  std::vector<int> widths{1, 16, 16};  // d^(0) .. d^(L); d^(0) = graph channels
  std::vector<int> mlp_hidden{64, 64};
  int classes = 2;
  // Divide basis outputs by n^(summed indices) and readout sums by n^2 / n.
  bool normalize = false;
};

struct RingGnnConfig {
  std::vector<int> widths{1, 16, 16};
  std::vector<int> mlp_hidden{64, 64};
  int classes = 2;
  bool normalize = false;
  InitSpec k1{1.0, 0.0};
  InitSpec k2{0.0, 0.0};
  bool use_eigenvalues = false;
  int num_eigenvalues = 5;  // 0 = all n
  EighMethod eigen_method = EighMethod::kJacobi;
};

enum class SgnnOperatorKind { kIdentity, kDegree, kPower };

// How kPower operators are built: walks of length exactly 2^t
// (power_graph), or reachability within 2^t steps (reach_graph).
enum class PowerReading { kExact, kWithin };

// kPower with exponent t is min(A^(2^t), 1); t = 0 is the adjacency.
struct SgnnOperator {
  SgnnOperatorKind kind = SgnnOperatorKind::kIdentity;
  int t = 0;
  std::string name() const;
};

// {I, D, min(A^(2^0),1), ..., min(A^(2^(i-1)),1)}
std::vector<SgnnOperator> sgnn_family(int i);

struct SgnnConfig {
  std::vector<SgnnOperator> operators = sgnn_family(1);
  int layers = 5;
  int width = 64;
  int classes = 2;
  // Scale every operator by 1/n so node states stay O(1) across layers.
  bool scale_operators = true;
  PowerReading power = PowerReading::kExact;
};

struct GinConfig {
  int layers = 5;
  int width = 64;
  double epsilon = 0.0;
  int classes = 2;
};

// Everything a forward pass needs from a graph, computed once per graph.
struct PreparedGraph {
  int n = 0;
  Tensor input;                    // [channels, n, n]
  std::vector<Tensor> operators;   // sGNN operator matrices, in config order
  Tensor adjacency;                // [n, n] channel 0
};

PreparedGraph prepare_graph(const Graph& g, const std::vector<SgnnOperator>& operators = {},
                            bool scale_operators = false, PowerReading power = PowerReading::kExact);

// ---- parameter initialisation ----
ParameterSet init_order2(const Order2Config& cfg, std::mt19937_64& rng);
ParameterSet init_ring_gnn(const RingGnnConfig& cfg, std::mt19937_64& rng);
ParameterSet init_sgnn(const SgnnConfig& cfg, std::mt19937_64& rng);
ParameterSet init_gin(const GinConfig& cfg, std::mt19937_64& rng);

// ---- forward passes; each returns logits of shape [classes] ----
Tensor order2_forward(const PreparedGraph& g, const ParameterSet& params, const Order2Config& cfg);
Tensor ring_gnn_forward(const PreparedGraph& g, const ParameterSet& params, const RingGnnConfig& cfg);
Tensor sgnn_forward(const PreparedGraph& g, const ParameterSet& params, const SgnnConfig& cfg);
Tensor gin_forward(const PreparedGraph& g, const ParameterSet& params, const GinConfig& cfg);

Tensor order2_forward(const Graph& g, const ParameterSet& params, const Order2Config& cfg);
Tensor ring_gnn_forward(const Graph& g, const ParameterSet& params, const RingGnnConfig& cfg);
Tensor sgnn_forward(const Graph& g, const ParameterSet& params, const SgnnConfig& cfg);
Tensor gin_forward(const Graph& g, const ParameterSet& params, const GinConfig& cfg);

// Node states [n, width] after each layer (index 0 is the input), for
// inspecting how information propagates.
std::vector<Tensor> sgnn_node_states(const PreparedGraph& g, const ParameterSet& params, const SgnnConfig& cfg);
std::vector<Tensor> gin_node_states(const PreparedGraph& g, const ParameterSet& params, const GinConfig& cfg);

// Readout features of the last Ring-GNN layer, before the MLP.
Tensor ring_gnn_features(const PreparedGraph& g, const ParameterSet& params, const RingGnnConfig& cfg);

// Hand-set 2-layer Ring-GNN whose single output is sum_ij min(A^2, 1).
struct Separator {
  RingGnnConfig config;
  ParameterSet params;
};
Separator construct_separator();

}  // namespace ringgnn
