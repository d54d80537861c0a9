#include "ringgnn/expressivity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include "ringgnn/graph_ops.hpp"
#include "ringgnn/models.hpp"
#include "ringgnn/tensor.hpp"

namespace ringgnn {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t combine(std::uint64_t seed, std::uint64_t v) { return mix(seed ^ (v + 0x632be59bd9b4e019ull + (seed << 6))); }

// Sorted final WL colours, one 64-bit hash per node.
std::vector<std::uint64_t> wl_colours(const Graph& g) {
  const int n = g.n();
  std::vector<std::uint64_t> colour(n);
  for (int v = 0; v < n; ++v) colour[v] = mix(std::bit_cast<std::uint64_t>(g.at(v, v)));
  std::vector<std::uint64_t> next(n), around;
  for (int round = 0; round < 2 * n; ++round) {
    for (int v = 0; v < n; ++v) {
      around.clear();
      for (int u = 0; u < n; ++u) {
        if (u != v && g.has_edge(v, u)) around.push_back(colour[u]);
      }
      std::sort(around.begin(), around.end());
      std::uint64_t h = combine(0x1234567ull, colour[v]);
      for (auto c : around) h = combine(h, c);
      next[v] = h;
    }
    colour.swap(next);
  }
  std::sort(colour.begin(), colour.end());
  return colour;
}

Fingerprint split_words(const std::vector<std::uint64_t>& words) {
  Fingerprint f;
  f.reserve(2 * words.size());
  for (auto w : words) {
    f.push_back(static_cast<double>(w >> 32));
    f.push_back(static_cast<double>(w & 0xffffffffull));
  }
  return f;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); }

// Cluster labels for one coordinate across the collection (see
// InvariantFamily::tolerance). Missing coordinates share label -1.
std::vector<int> cluster_coordinate(const std::vector<Fingerprint>& prints, std::size_t coord, double tol) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < prints.size(); ++i) {
    if (coord < prints[i].size()) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return prints[a][coord] < prints[b][coord]; });
  std::vector<int> label(prints.size(), -1);
  int current = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0) {
      const double lo = prints[order[k - 1]][coord], hi = prints[order[k]][coord];
      if (hi - lo > tol * std::max(1.0, std::abs(hi))) ++current;
    }
    label[order[k]] = current;
  }
  return label;
}

Partition from_keys(const GraphCollection& c, const std::string& source, const std::vector<std::vector<double>>& keys) {
  Partition p;
  p.source = source;
  p.collection = c.ids;
  p.block_of.resize(c.size());
  std::map<std::vector<double>, int> seen;
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto [it, fresh] = seen.try_emplace(keys[i], p.block_count);
    if (fresh) ++p.block_count;
    p.block_of[i] = it->second;
  }
  return p;
}

struct RandomNet {
  RingGnnConfig ring;
  GinConfig gin;
};

RandomNet random_net_configs() {
  RandomNet r;
  r.ring.widths = {1, 4, 4};
  r.ring.mlp_hidden = {};
  r.ring.classes = 4;
  r.ring.k1 = {1.0, 0.0};
  r.ring.k2 = {0.0, 1.0};
  r.gin.layers = 3;
  r.gin.width = 8;
  r.gin.classes = 4;
  return r;
}

// Parameters of draw `d`, identical for the order-2 and Ring-GNN families.
std::vector<ParameterSet> ring_draws(int draws, std::uint64_t seed, bool zero_k2) {
  const RandomNet cfg = random_net_configs();
  std::vector<ParameterSet> out;
  for (int d = 0; d < draws; ++d) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(d), 0xa5a5u};
    std::mt19937_64 rng(seq);
    ParameterSet ps = init_ring_gnn(cfg.ring, rng);
    if (zero_k2) {
      for (std::size_t t = 0; t + 1 < cfg.ring.widths.size(); ++t) ps.get("ring" + std::to_string(t) + ".k2").mutable_values()[0] = 0.0;
    }
    out.push_back(std::move(ps));
  }
  return out;
}

void check_draws(int draws) {
  if (draws < 1) throw ParameterError("random family: draws must be positive");
}

InvariantFamily ring_family(const std::string& name, int draws, std::uint64_t seed, bool zero_k2) {
  check_draws(draws);
  auto params = std::make_shared<std::vector<ParameterSet>>(ring_draws(draws, seed, zero_k2));
  InvariantFamily f;
  f.name = name;
  f.tolerance = kRandomTolerance;
  f.lower_bound = true;
  f.fingerprint = [params](const Graph& g) {
    const RingGnnConfig cfg = random_net_configs().ring;
    const PreparedGraph pg = prepare_graph(g);
    Fingerprint out;
    for (const auto& ps : *params) {
      const Tensor y = ring_gnn_forward(pg, ps, cfg);
      out.insert(out.end(), y.values().begin(), y.values().end());
    }
    return out;
  };
  return f;
}

}  // namespace

GraphCollection enumerated_collection(int n) {
  GraphCollection c;
  c.n = n;
  c.graphs = enumerate_graphs(n);
  c.ids.resize(c.graphs.size());
  for (std::size_t i = 0; i < c.graphs.size(); ++i) c.ids[i] = GraphId{i};
  return c;
}

std::vector<std::vector<GraphId>> Partition::blocks() const {
  std::vector<std::vector<GraphId>> out(block_count);
  for (std::size_t i = 0; i < collection.size(); ++i) out[block_of[i]].push_back(collection[i]);
  return out;
}

Partition induce_partition(const GraphCollection& collection, const InvariantFamily& family) {
  std::vector<Fingerprint> prints;
  prints.reserve(collection.size());
  for (const Graph& g : collection.graphs) prints.push_back(family.fingerprint(g));
  if (family.tolerance == 0.0) return from_keys(collection, family.name, prints);

  std::size_t width = 0;
  for (const auto& p : prints) width = std::max(width, p.size());
  std::vector<std::vector<double>> keys(prints.size());
  for (std::size_t i = 0; i < prints.size(); ++i) keys[i].push_back(static_cast<double>(prints[i].size()));
  for (std::size_t coord = 0; coord < width; ++coord) {
    const auto labels = cluster_coordinate(prints, coord, family.tolerance);
    for (std::size_t i = 0; i < prints.size(); ++i) keys[i].push_back(labels[i]);
  }
  return from_keys(collection, family.name, keys);
}

Partition isomorphism_partition(const GraphCollection& collection) {
  Partition p;
  p.source = "iso";
  p.collection = collection.ids;
  p.block_of.resize(collection.size());
  // bucket key -> (block index, representative position) list
  std::map<std::vector<std::uint64_t>, std::vector<std::pair<int, std::size_t>>> buckets;
  for (std::size_t i = 0; i < collection.size(); ++i) {
    const Graph& g = collection.graphs[i];
    auto key = wl_colours(g);
    auto degrees = g.degrees();
    std::sort(degrees.begin(), degrees.end());
    for (int d : degrees) key.push_back(static_cast<std::uint64_t>(d));
    auto& reps = buckets[key];
    int block = -1;
    for (const auto& [b, rep] : reps) {
      if (are_isomorphic(collection.graphs[rep], g)) {
        block = b;
        break;
      }
    }
    if (block < 0) {
      block = p.block_count++;
      reps.emplace_back(block, i);
    }
    p.block_of[i] = block;
  }
  return p;
}

std::string relation_name(Relation r) {
  switch (r) {
    case Relation::kEqual: return "equal";
    case Relation::kStrictlyFiner: return "finer";
    case Relation::kStrictlyCoarser: return "coarser";
    case Relation::kIncomparable: return "incomparable";
  }
  return "?";
}

namespace {

// Simplest pair in the same `whole` block but different `parts` blocks.
std::optional<std::pair<GraphId, GraphId>> simplest_split(const Partition& whole, const Partition& parts) {
  using Key = std::pair<int, std::uint64_t>;  // (edges, id)
  auto key_of = [&](std::size_t i) { return Key{std::popcount(whole.collection[i].value), whole.collection[i].value}; };
  std::vector<std::optional<std::size_t>> best(whole.block_count);
  for (std::size_t i = 0; i < whole.collection.size(); ++i) {
    auto& b = best[whole.block_of[i]];
    if (!b || key_of(i) < key_of(*b)) b = i;
  }
  std::vector<std::optional<std::size_t>> partner(whole.block_count);
  for (std::size_t i = 0; i < whole.collection.size(); ++i) {
    const int blk = whole.block_of[i];
    if (parts.block_of[i] == parts.block_of[*best[blk]]) continue;
    auto& q = partner[blk];
    if (!q || key_of(i) < key_of(*q)) q = i;
  }
  std::optional<std::tuple<int, std::uint64_t, std::uint64_t>> top;
  std::optional<std::pair<GraphId, GraphId>> out;
  for (int blk = 0; blk < whole.block_count; ++blk) {
    if (!partner[blk]) continue;
    GraphId a = whole.collection[*best[blk]], b = whole.collection[*partner[blk]];
    if (b < a) std::swap(a, b);
    const auto score = std::make_tuple(std::popcount(a.value) + std::popcount(b.value), a.value, b.value);
    if (!top || score < *top) {
      top = score;
      out = std::make_pair(a, b);
    }
  }
  return out;
}

}  // namespace

PartitionComparison compare_partitions(const Partition& p1, const Partition& p2) {
  if (p1.collection != p2.collection) {
    throw DomainError("compare_partitions: '" + p1.source + "' and '" + p2.source + "' cover different collections");
  }
  PartitionComparison c;
  c.split_by_first = simplest_split(p2, p1);
  c.split_by_second = simplest_split(p1, p2);
  if (c.split_by_first && c.split_by_second) {
    c.relation = Relation::kIncomparable;
  } else if (c.split_by_first) {
    c.relation = Relation::kStrictlyFiner;
  } else if (c.split_by_second) {
    c.relation = Relation::kStrictlyCoarser;
  } else {
    c.relation = Relation::kEqual;
  }
  return c;
}

// ---------------------------------------------------------------- families

InvariantFamily wl_family() {
  return {"wl", [](const Graph& g) { return split_words(wl_colours(g)); }, 0.0, false};
}

InvariantFamily spectrum_family() {
  return {"spectrum",
          [](const Graph& g) {
            EighOptions opts;
            opts.method = EighMethod::kTridiagonal;
            const Tensor eig = sym_eigh(adjacency_tensor(g), opts).values;
            return Fingerprint(eig.values().begin(), eig.values().end());
          },
          1e-6, false};
}

InvariantFamily power_degree_family() {
  return {"power-degrees",
          [](const Graph& g) {
            const int n = g.n();
            int top = 0;
            while ((1 << top) < n) ++top;
            std::vector<std::vector<double>> tuples(n);
            for (int t = 0; t <= top; ++t) {
              const Graph p = power_graph(g, t);
              for (int v = 0; v < n; ++v) {
                double deg = 0.0;
                for (int u = 0; u < n; ++u) deg += p.at(v, u);
                tuples[v].push_back(deg);
              }
            }
            std::sort(tuples.begin(), tuples.end());
            Fingerprint f;
            for (const auto& t : tuples) f.insert(f.end(), t.begin(), t.end());
            return f;
          },
          0.0, false};
}

InvariantFamily random_order2_family(int draws, std::uint64_t seed) {
  return ring_family("random-order2", draws, seed, true);
}

InvariantFamily random_ring_gnn_family(int draws, std::uint64_t seed) {
  return ring_family("random-ring-gnn", draws, seed, false);
}

InvariantFamily random_gin_family(int draws, std::uint64_t seed) {
  check_draws(draws);
  const GinConfig cfg = random_net_configs().gin;
  auto params = std::make_shared<std::vector<ParameterSet>>();
  for (int d = 0; d < draws; ++d) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(d), 0x61u};
    std::mt19937_64 rng(seq);
    params->push_back(init_gin(cfg, rng));
  }
  InvariantFamily f;
  f.name = "random-gin";
  f.tolerance = kRandomTolerance;
  f.lower_bound = true;
  f.fingerprint = [params, cfg](const Graph& g) {
    const PreparedGraph pg = prepare_graph(g);
    Fingerprint out;
    for (const auto& ps : *params) {
      const Tensor y = gin_forward(pg, ps, cfg);
      out.insert(out.end(), y.values().begin(), y.values().end());
    }
    return out;
  };
  return f;
}

// ---------------------------------------------------------------- reports

std::vector<std::string> family_names() {
  return {"wl", "spectrum", "power-degrees", "random-order2", "random-ring-gnn", "random-gin"};
}

InvariantFamily family_by_name(const std::string& name, std::uint64_t seed) {
  if (name == "wl") return wl_family();
  if (name == "spectrum") return spectrum_family();
  if (name == "power-degrees") return power_degree_family();
  if (name == "random-order2") return random_order2_family(kRandomDraws, seed);
  if (name == "random-ring-gnn") return random_ring_gnn_family(kRandomDraws, seed);
  if (name == "random-gin") return random_gin_family(kRandomDraws, seed);
  throw ParameterError("unknown invariant family '" + name + "'");
}

std::string Figure1Report::to_csv() const {
  std::ostringstream s;
  s << "family_a,family_b,relation,witness_pair_ids\n";
  auto pair = [](const std::optional<std::pair<GraphId, GraphId>>& p) {
    return p ? std::to_string(p->first.value) + "|" + std::to_string(p->second.value) : std::string();
  };
  for (const auto& r : rows) {
    s << r.family_a << ',' << r.family_b << ',' << relation_name(r.comparison.relation) << ',';
    const std::string a = pair(r.comparison.split_by_first), b = pair(r.comparison.split_by_second);
    s << a << (!a.empty() && !b.empty() ? ";" : "") << b << '\n';
  }
  return s.str();
}

Figure1Report figure1_report(int n, const Figure1Options& options) {
  if (n < 1) throw ParameterError("figure1_report: n must be positive");
  if (n > 6 && !options.representatives_only) {
    throw CapacityError("figure1_report: n = " + std::to_string(n) + " needs representatives_only");
  }
  if (n > kMaxEnumerationNodes) throw CapacityError("figure1_report: n is capped at 7");

  GraphCollection collection = enumerated_collection(n);
  Partition iso = isomorphism_partition(collection);
  if (options.representatives_only) {
    GraphCollection reps;
    reps.n = n;
    std::vector<bool> taken(iso.block_count, false);
    for (std::size_t i = 0; i < collection.size(); ++i) {
      if (taken[iso.block_of[i]]) continue;
      taken[iso.block_of[i]] = true;
      reps.graphs.push_back(collection.graphs[i]);
      reps.ids.push_back(collection.ids[i]);
    }
    collection = std::move(reps);
    iso = isomorphism_partition(collection);
  }

  Figure1Report report;
  report.n = n;
  report.partitions.push_back(iso);
  report.lower_bound.push_back(false);
  const auto names = options.families.empty() ? family_names() : options.families;
  for (const auto& name : names) {
    if (name == "iso") continue;
    const InvariantFamily f = family_by_name(name, options.seed);
    report.partitions.push_back(induce_partition(collection, f));
    report.lower_bound.push_back(f.lower_bound);
  }
  for (std::size_t a = 0; a < report.partitions.size(); ++a) {
    for (std::size_t b = a + 1; b < report.partitions.size(); ++b) {
      report.rows.push_back({report.partitions[a].source, report.partitions[b].source,
                             compare_partitions(report.partitions[a], report.partitions[b])});
    }
  }
  return report;
}

// ---------------------------------------------------------------- gadgets

double psi(double x) { return std::max(x - 1.0, 0.0) + std::max(x + 1.0, 0.0) - 2.0 * std::max(x, 0.0); }

double bump(double x, double a, double b) {
  if (!(a > 0.0)) throw ParameterError("bump: width a must be positive");
  return psi((x - b) / a);
}

std::vector<FamilyVerdict> discrimination_witness(const Graph& g1, const Graph& g2,
                                                  const std::vector<InvariantFamily>& families) {
  if (g1.n() != g2.n()) throw DomainError("discrimination_witness: graphs differ in size");
  if (are_isomorphic(g1, g2)) throw DomainError("discrimination_witness: the graphs are isomorphic");
  std::vector<FamilyVerdict> out;
  for (const auto& f : families) {
    FamilyVerdict v{f.name, false, f.fingerprint(g1), f.fingerprint(g2)};
    if (v.first.size() != v.second.size()) {
      v.separated = true;
    } else {
      for (std::size_t i = 0; i < v.first.size() && !v.separated; ++i) {
        v.separated = f.tolerance == 0.0 ? v.first[i] != v.second[i] : !close(v.first[i], v.second[i], f.tolerance);
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace ringgnn
