#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ringgnn/graph.hpp"
#include "ringgnn/tensor.hpp"

namespace ringgnn {

struct Coloring {
  std::vector<int> colors;                     // one id per node, ids contiguous from 0
  bool stable = false;                         // partition stopped changing before the round cap
  int rounds = 0;                              // refinement rounds performed
  std::vector<std::pair<int, int>> histogram;  // (color, count), sorted by color
};

inline constexpr int kDefaultWlRounds = 100;

// 1-WL colour refinement. Initial colours are the node labels (diagonal of
// channel 0). Each round a node's colour becomes the rank of its signature
// (old colour, sorted neighbour colours) among all signatures present, so
// ids are canonical and do not depend on node order.
Coloring wl_refine(const Graph& g, int max_rounds = kDefaultWlRounds);

// Refines both graphs side by side (colours shared across the pair) and
// reports whether the colour histograms ever differ.
bool wl_distinguishes(const Graph& g1, const Graph& g2, int max_rounds = kDefaultWlRounds);

// Walk counts A^k in saturating 64-bit integer arithmetic. Only the sign of
// an entry matters downstream, so saturation keeps min(A^k, 1) exact.
std::vector<std::uint64_t> walk_counts(const Graph& g, std::uint64_t length);

// min(A^(2^t), 1). t = 0 returns the adjacency itself. The diagonal is set
// wherever a closed walk of that length exists, so the result is 0/1 and
// symmetric but not necessarily loop-free.
Graph power_graph(const Graph& g, int t);

// min((A + I)^(2^t), 1): reachability within at most 2^t steps, self
// included. Same range of t as power_graph.
Graph reach_graph(const Graph& g, int t);

Tensor adjacency_tensor(const Graph& g, int channel = 0);
Tensor degree_matrix(const Graph& g);
// I - D^{-1/2} A D^{-1/2}; an isolated node gets D^{-1/2} = 0, so its row
// is the identity row.
Tensor normalized_laplacian(const Graph& g);

inline constexpr int kDefaultFingerprintDigits = 8;
// Adjacency eigenvalues, descending, rounded to `round_to` decimals.
std::vector<double> spectral_fingerprint(const Graph& g, int round_to = kDefaultFingerprintDigits);

std::string to_json(const Coloring& c);
std::string fingerprint_to_json(const std::vector<double>& fingerprint);

}  // namespace ringgnn
