#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ringgnn/error.hpp"

namespace ringgnn {

// Identifier of a graph inside an enumerated or loaded collection. For
// enumerated spaces it is the bitmask over the strict upper triangle.
struct GraphId {
  std::uint64_t value = 0;
  auto operator<=>(const GraphId&) const = default;
};

// Dense n x n x d feature array. Diagonal entries carry node labels and
// off-diagonal entries carry edge labels; channel 0 holds the adjacency of
// a simple graph. Storage is row-major with the channel index fastest.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n, int channels = 1);

  // Simple undirected graph from an edge list (0-indexed, i != j).
  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges);
  static Graph from_adjacency(int n, const std::vector<double>& adjacency);

  int n() const { return n_; }
  int channels() const { return channels_; }

  double at(int i, int j, int k = 0) const { return data_[index(i, j, k)]; }
  double& at(int i, int j, int k = 0) { return data_[index(i, j, k)]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // Channel k as a row-major n x n matrix.
  std::vector<double> channel(int k = 0) const;

  // Channel 0 is symmetric, {0,1}-valued and has a zero diagonal.
  bool is_simple() const;

  void add_edge(int i, int j);
  bool has_edge(int i, int j) const { return at(i, j) != 0.0; }

  // Undirected edges (i < j) of channel 0.
  std::vector<std::pair<int, int>> edges() const;
  int edge_count() const;
  std::vector<int> degrees() const;

  bool operator==(const Graph& other) const = default;

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * channels_ + k;
  }

  int n_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
};

class Permutation {
 public:
  Permutation() = default;
  // Throws ParameterError unless `mapping` is a bijection on [0, n).
  explicit Permutation(std::vector<int> mapping);

  static Permutation identity(int n);
  static Permutation random(int n, std::mt19937_64& rng);
  // i -> i + shift (mod n)
  static Permutation rotation(int n, int shift);

  int size() const { return static_cast<int>(mapping_.size()); }
  int operator()(int i) const { return mapping_[i]; }
  const std::vector<int>& mapping() const { return mapping_; }
  Permutation inverse() const;

 private:
  std::vector<int> mapping_;
};

// output[i][j][k] = g[p(i)][p(j)][k], i.e. pi^T G pi on every channel.
Graph apply_permutation(const Graph& g, const Permutation& p);

// Circular skip-link graph G_{n,k}: i ~ j iff |i - j| = 1 or k (mod n).
Graph generate_csl(int n, int k);

// Uniform-ish simple d-regular graph from the pairing model with full
// restarts on self-loops or multi-edges. Deterministic in `seed`.
inline constexpr int kRegularRestartCap = 10000;
Graph generate_random_regular(int n, int degree, std::uint64_t seed);

inline constexpr int kMaxEnumerationNodes = 7;
// All 2^(n(n-1)/2) simple graphs on n labelled nodes, indexed by GraphId.
std::vector<Graph> enumerate_graphs(int n);
std::uint64_t enumeration_size(int n);
Graph graph_from_id(int n, GraphId id);
GraphId id_of(const Graph& g);

inline constexpr int kMaxExhaustiveNodes = 10;
// Exact isomorphism test on channel 0 by backtracking over partial maps.
bool are_isomorphic(const Graph& g1, const Graph& g2);

// A few small named graphs used throughout tests and demos.
Graph cycle_graph(int n);
Graph path_graph(int n);
Graph star_graph(int leaves);
Graph complete_graph(int n);
Graph disjoint_union(const Graph& a, const Graph& b);

// {"n": int, "channels": int, "data": [...]}
std::string to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

// "n m" header then one "i j" line per undirected edge.
std::string to_edge_list(const Graph& g);
Graph graph_from_edge_list(const std::string& text);

// Reads either format, chosen by the first non-space character.
Graph read_graph_file(const std::string& path);

}  // namespace ringgnn
