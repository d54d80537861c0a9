#include "ringgnn/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ringgnn {

Graph::Graph(int n, int channels) : n_(n), channels_(channels) {
  if (n < 1 || channels < 1) {
    throw ParameterError("graph needs n >= 1 and channels >= 1");
  }
  data_.assign(static_cast<std::size_t>(n) * n * channels, 0.0);
}

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  Graph g(n);
  for (auto [i, j] : edges) g.add_edge(i, j);
  return g;
}

Graph Graph::from_adjacency(int n, const std::vector<double>& adjacency) {
  if (adjacency.size() != static_cast<std::size_t>(n) * n) {
    throw DimensionError("adjacency must have n*n entries");
  }
  Graph g(n);
  g.data_ = adjacency;
  return g;
}

std::vector<double> Graph::channel(int k) const {
  if (k < 0 || k >= channels_) throw DimensionError("channel index out of range");
  std::vector<double> out(static_cast<std::size_t>(n_) * n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) out[i * n_ + j] = at(i, j, k);
  }
  return out;
}

bool Graph::is_simple() const {
  for (int i = 0; i < n_; ++i) {
    if (at(i, i) != 0.0) return false;
    for (int j = i + 1; j < n_; ++j) {
      double a = at(i, j);
      if (a != at(j, i) || (a != 0.0 && a != 1.0)) return false;
    }
  }
  return true;
}

void Graph::add_edge(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j) {
    throw ParameterError("invalid edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  at(i, j) = 1.0;
  at(j, i) = 1.0;
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if (at(i, j) != 0.0) out.emplace_back(i, j);
    }
  }
  return out;
}

int Graph::edge_count() const { return static_cast<int>(edges().size()); }

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(n_, 0);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i != j && at(i, j) != 0.0) ++deg[i];
    }
  }
  return deg;
}

Permutation::Permutation(std::vector<int> mapping) : mapping_(std::move(mapping)) {
  std::vector<char> seen(mapping_.size(), 0);
  for (int v : mapping_) {
    if (v < 0 || v >= static_cast<int>(mapping_.size()) || seen[v]) {
      throw ParameterError("permutation mapping is not a bijection");
    }
    seen[v] = 1;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  return Permutation(std::move(m));
}

Permutation Permutation::random(int n, std::mt19937_64& rng) {
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  // Fisher-Yates with our own index draws so results do not depend on the
  // standard library's shuffle implementation.
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(m[i], m[pick(rng)]);
  }
  return Permutation(std::move(m));
}

Permutation Permutation::rotation(int n, int shift) {
  std::vector<int> m(n);
  for (int i = 0; i < n; ++i) m[i] = ((i + shift) % n + n) % n;
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(mapping_.size());
  for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = static_cast<int>(i);
  return Permutation(std::move(inv));
}

Graph apply_permutation(const Graph& g, const Permutation& p) {
  if (p.size() != g.n()) {
    throw DimensionError("permutation size " + std::to_string(p.size()) + " != graph size " +
                         std::to_string(g.n()));
  }
  Graph out(g.n(), g.channels());
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      for (int k = 0; k < g.channels(); ++k) out.at(i, j, k) = g.at(p(i), p(j), k);
    }
  }
  return out;
}

Graph generate_csl(int n, int k) {
  if (n < 5 || k < 2 || k > n - 2) {
    throw ParameterError("CSL graph needs n >= 5 and 2 <= k <= n-2 (got n=" + std::to_string(n) +
                         ", k=" + std::to_string(k) + ")");
  }
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    g.add_edge(i, (i + 1) % n);
    g.add_edge(i, (i + k) % n);
  }
  return g;
}

Graph generate_random_regular(int n, int degree, std::uint64_t seed) {
  if (n < 1 || degree < 0 || degree >= n || (n * degree) % 2 != 0) {
    throw ParameterError("no simple " + std::to_string(degree) + "-regular graph on " +
                         std::to_string(n) + " nodes");
  }
  std::mt19937_64 rng(seed);
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * degree);
  for (int restart = 0; restart < kRegularRestartCap; ++restart) {
    stubs.clear();
    for (int v = 0; v < n; ++v) stubs.insert(stubs.end(), degree, v);
    for (int i = static_cast<int>(stubs.size()) - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(stubs[i], stubs[pick(rng)]);
    }
    Graph g(n);
    bool ok = true;
    for (std::size_t s = 0; s + 1 < stubs.size(); s += 2) {
      int u = stubs[s], v = stubs[s + 1];
      if (u == v || g.has_edge(u, v)) {
        ok = false;
        break;
      }
      g.add_edge(u, v);
    }
    if (ok) return g;
  }
  throw RetryExhaustedError("pairing model failed " + std::to_string(kRegularRestartCap) +
                            " times for n=" + std::to_string(n) + ", d=" + std::to_string(degree));
}

std::uint64_t enumeration_size(int n) {
  if (n < 1 || n > kMaxEnumerationNodes) {
    throw CapacityError("graph enumeration supports 1 <= n <= " +
                        std::to_string(kMaxEnumerationNodes));
  }
  return std::uint64_t{1} << (n * (n - 1) / 2);
}

Graph graph_from_id(int n, GraphId id) {
  if (id.value >= enumeration_size(n)) throw ParameterError("graph id out of range");
  Graph g(n);
  int bit = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++bit) {
      if ((id.value >> bit) & 1u) g.add_edge(i, j);
    }
  }
  return g;
}

GraphId id_of(const Graph& g) {
  enumeration_size(g.n());
  std::uint64_t mask = 0;
  int bit = 0;
  for (int i = 0; i < g.n(); ++i) {
    for (int j = i + 1; j < g.n(); ++j, ++bit) {
      if (g.at(i, j) != 0.0) mask |= std::uint64_t{1} << bit;
    }
  }
  return GraphId{mask};
}

std::vector<Graph> enumerate_graphs(int n) {
  const std::uint64_t count = enumeration_size(n);
  std::vector<Graph> out;
  out.reserve(count);
  for (std::uint64_t id = 0; id < count; ++id) out.push_back(graph_from_id(n, GraphId{id}));
  return out;
}

namespace {

struct IsoSearch {
  int n;
  std::vector<std::uint32_t> adj1, adj2;
  std::vector<int> deg1, deg2;
  std::vector<int> order;     // g1 nodes in assignment order
  std::vector<int> map12;     // g1 -> g2, -1 if unassigned
  std::uint32_t used2 = 0;

  bool extend(int depth) {
    if (depth == n) return true;
    const int u = order[depth];
    for (int v = 0; v < n; ++v) {
      if ((used2 >> v) & 1u || deg2[v] != deg1[u]) continue;
      bool consistent = true;
      for (int d = 0; d < depth && consistent; ++d) {
        const int w = order[d];
        const bool e1 = (adj1[u] >> w) & 1u;
        const bool e2 = (adj2[v] >> map12[w]) & 1u;
        consistent = e1 == e2;
      }
      if (!consistent) continue;
      map12[u] = v;
      used2 |= 1u << v;
      if (extend(depth + 1)) return true;
      used2 &= ~(1u << v);
      map12[u] = -1;
    }
    return false;
  }
};

std::vector<std::uint32_t> bit_rows(const Graph& g) {
  std::vector<std::uint32_t> rows(g.n(), 0);
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      if (i != j && g.at(i, j) != 0.0) rows[i] |= 1u << j;
    }
  }
  return rows;
}

}  // namespace

bool are_isomorphic(const Graph& g1, const Graph& g2) {
  if (g1.n() != g2.n()) return false;
  const int n = g1.n();
  if (n > kMaxExhaustiveNodes) {
    throw CapacityError("exhaustive isomorphism test supports n <= " +
                        std::to_string(kMaxExhaustiveNodes));
  }
  IsoSearch s{n, bit_rows(g1), bit_rows(g2), g1.degrees(), g2.degrees(), {}, {}, 0};
  auto d1 = s.deg1, d2 = s.deg2;
  std::sort(d1.begin(), d1.end());
  std::sort(d2.begin(), d2.end());
  if (d1 != d2) return false;

  // Assign high-degree nodes first, then prefer neighbours of already
  // placed nodes so adjacency checks prune early.
  std::vector<char> placed(n, 0);
  while (static_cast<int>(s.order.size()) < n) {
    int best = -1, best_links = -1;
    for (int u = 0; u < n; ++u) {
      if (placed[u]) continue;
      int links = 0;
      for (int w : s.order) links += (s.adj1[u] >> w) & 1u;
      if (links > best_links || (links == best_links && s.deg1[u] > s.deg1[best])) {
        best = u;
        best_links = links;
      }
    }
    placed[best] = 1;
    s.order.push_back(best);
  }
  s.map12.assign(n, -1);
  return s.extend(0);
}

Graph cycle_graph(int n) {
  if (n < 3) throw ParameterError("cycle needs n >= 3");
  Graph g(n);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  return g;
}

Graph path_graph(int n) {
  Graph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph star_graph(int leaves) {
  Graph g(leaves + 1);
  for (int i = 1; i <= leaves; ++i) g.add_edge(0, i);
  return g;
}

Graph complete_graph(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  }
  return g;
}

Graph disjoint_union(const Graph& a, const Graph& b) {
  if (a.channels() != b.channels()) throw DimensionError("channel counts differ");
  Graph g(a.n() + b.n(), a.channels());
  for (int i = 0; i < a.n(); ++i) {
    for (int j = 0; j < a.n(); ++j) {
      for (int k = 0; k < a.channels(); ++k) g.at(i, j, k) = a.at(i, j, k);
    }
  }
  for (int i = 0; i < b.n(); ++i) {
    for (int j = 0; j < b.n(); ++j) {
      for (int k = 0; k < b.channels(); ++k) g.at(a.n() + i, a.n() + j, k) = b.at(i, j, k);
    }
  }
  return g;
}

std::string to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.n();
  j["channels"] = g.channels();
  j["data"] = g.data();
  return j.dump();
}

Graph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestionError(std::string("graph JSON: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("channels") || !j.contains("data")) {
    throw IngestionError("graph JSON needs keys n, channels, data");
  }
  const int n = j["n"].get<int>();
  const int channels = j["channels"].get<int>();
  auto data = j["data"].get<std::vector<double>>();
  Graph g(n, channels);
  if (data.size() != g.data().size()) {
    throw IngestionError("graph JSON data has " + std::to_string(data.size()) +
                         " entries, expected " + std::to_string(g.data().size()));
  }
  g.data() = std::move(data);
  return g;
}

std::string to_edge_list(const Graph& g) {
  const auto e = g.edges();
  std::ostringstream out;
  out << g.n() << ' ' << e.size() << '\n';
  for (auto [i, j] : e) out << i << ' ' << j << '\n';
  return out.str();
}

Graph graph_from_edge_list(const std::string& text) {
  std::istringstream in(text);
  long long n = 0, m = 0;
  if (!(in >> n >> m) || n < 1 || m < 0) throw IngestionError("edge list: bad 'n m' header");
  Graph g(static_cast<int>(n));
  for (long long e = 0; e < m; ++e) {
    long long i = 0, j = 0;
    if (!(in >> i >> j)) {
      throw IngestionError("edge list: expected " + std::to_string(m) + " edges, got " +
                           std::to_string(e));
    }
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
      throw IngestionError("edge list: invalid edge " + std::to_string(i) + " " +
                           std::to_string(j));
    }
    g.add_edge(static_cast<int>(i), static_cast<int>(j));
  }
  return g;
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open graph file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return graph_from_json(text);
  return graph_from_edge_list(text);
}

}  // namespace ringgnn
