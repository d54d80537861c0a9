#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ringgnn/graph.hpp"

namespace ringgnn {

// A finite graph space: graphs with their ids, in a fixed order.
struct GraphCollection {
  int n = 0;
  std::vector<Graph> graphs;
  std::vector<GraphId> ids;

  std::size_t size() const { return graphs.size(); }
};

// Every simple graph on n labelled nodes (ids are the edge bitmasks).
GraphCollection enumerated_collection(int n);

using Fingerprint = std::vector<double>;

struct InvariantFamily {
  std::string name;
  std::function<Fingerprint(const Graph&)> fingerprint;
  // 0: fingerprints are compared exactly. Otherwise each coordinate is
  // clustered on its own: sorted values split wherever consecutive values
  // differ by more than tolerance * max(1, |value|).
  double tolerance = 0.0;
  // Fingerprints from finitely many random members of a function class: a
  // separation is genuine, a non-separation only evidence.
  bool lower_bound = false;
};

// Blocks are numbered in order of first appearance in the collection.
struct Partition {
  std::string source;
  std::vector<GraphId> collection;
  std::vector<int> block_of;  // one block index per collection position
  int block_count = 0;

  std::vector<std::vector<GraphId>> blocks() const;
  bool same_block(std::size_t a, std::size_t b) const { return block_of[a] == block_of[b]; }
};

Partition induce_partition(const GraphCollection& collection, const InvariantFamily& family);

// Exact isomorphism classes: graphs are bucketed by a WL hash and degree
// sequence, then tested with are_isomorphic against each bucket's
// representatives.
Partition isomorphism_partition(const GraphCollection& collection);

enum class Relation { kEqual, kStrictlyFiner, kStrictlyCoarser, kIncomparable };
std::string relation_name(Relation r);  // equal, finer, coarser, incomparable

struct PartitionComparison {
  Relation relation = Relation::kEqual;
  // Same block in p2, different blocks in p1 (p1 separates, p2 does not).
  std::optional<std::pair<GraphId, GraphId>> split_by_first;
  // Same block in p1, different blocks in p2.
  std::optional<std::pair<GraphId, GraphId>> split_by_second;
};

// p1 is finer when every p1 block lies inside a p2 block. Witnesses are the
// simplest such pairs: fewest total edges (set bits of the ids), then lowest
// ids. Throws DomainError when the collections differ.
PartitionComparison compare_partitions(const Partition& p1, const Partition& p2);

// ---- families ----

inline constexpr int kRandomDraws = 16;
inline constexpr double kRandomTolerance = 1e-6;

// Global 1-WL colour hashes after 2n rounds; the sorted multiset of final
// colours (each colour encodes its whole history).
InvariantFamily wl_family();
// Adjacency eigenvalues, descending, clustered at 1e-6.
InvariantFamily spectrum_family();
// Multiset of per-node degree tuples over min(A^(2^t), 1), t = 0..T with
// 2^T >= n: the sGNN(I, D, A, {min(A^(2^t), 1)}) proxy.
InvariantFamily power_degree_family();
// Outputs of `draws` random networks. The order-2 family is the Ring-GNN
// family with the same seeds and k2 forced to 0.
InvariantFamily random_order2_family(int draws = kRandomDraws, std::uint64_t seed = 0);
InvariantFamily random_ring_gnn_family(int draws = kRandomDraws, std::uint64_t seed = 0);
InvariantFamily random_gin_family(int draws = kRandomDraws, std::uint64_t seed = 0);

// ---- reports ----

struct FamilyPairRow {
  std::string family_a;
  std::string family_b;
  PartitionComparison comparison;
};

struct Figure1Options {
  std::vector<std::string> families;  // empty: all of them
  // Work on one representative per isomorphism class. Required for n = 7.
  bool representatives_only = false;
  std::uint64_t seed = 0;
};

// Names accepted in Figure1Options::families; "iso" is always available.
std::vector<std::string> family_names();
InvariantFamily family_by_name(const std::string& name, std::uint64_t seed = 0);

struct Figure1Report {
  int n = 0;
  std::vector<Partition> partitions;  // iso first, then the requested families
  std::vector<bool> lower_bound;      // per partition
  std::vector<FamilyPairRow> rows;    // every unordered pair, in partition order

  // family_a,family_b,relation,witness_pair_ids. The witness column holds
  // "a|b" for split_by_first and split_by_second, separated by ';' (empty
  // side omitted).
  std::string to_csv() const;
};

Figure1Report figure1_report(int n, const Figure1Options& options = {});

// ---- constructive gadgets ----

// psi(x) = max(x - 1, 0) + max(x + 1, 0) - 2 max(x, 0), a tent with psi(0) = 1.
double psi(double x);
// psi((x - b) / a); ParameterError unless a > 0.
double bump(double x, double a, double b);

struct FamilyVerdict {
  std::string family;
  bool separated = false;
  Fingerprint first;
  Fingerprint second;
};

// Whether each family's fingerprint separates the pair. DomainError when the
// graphs are isomorphic or differ in size.
std::vector<FamilyVerdict> discrimination_witness(const Graph& g1, const Graph& g2,
                                                  const std::vector<InvariantFamily>& families);

}  // namespace ringgnn
