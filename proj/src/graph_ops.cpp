#include "ringgnn/graph_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "json.hpp"

namespace ringgnn {

namespace {

using Signature = std::pair<int, std::vector<int>>;

// One refinement round over a node set given as adjacency lists.
std::vector<int> refine_once(const std::vector<int>& colors, const std::vector<std::vector<int>>& nbrs) {
  const int n = static_cast<int>(colors.size());
  std::vector<Signature> sig(n);
  for (int v = 0; v < n; ++v) {
    sig[v].first = colors[v];
    for (int u : nbrs[v]) sig[v].second.push_back(colors[u]);
    std::sort(sig[v].second.begin(), sig[v].second.end());
  }
  std::vector<Signature> sorted = sig;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out(n);
  for (int v = 0; v < n; ++v) {
    out[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[v]) - sorted.begin());
  }
  return out;
}

// Initial colours: ranks of the distinct node labels.
std::vector<int> label_colors(const std::vector<double>& labels) {
  std::vector<double> distinct = labels;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<int> out(labels.size());
  for (std::size_t v = 0; v < labels.size(); ++v) {
    out[v] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), labels[v]) - distinct.begin());
  }
  return out;
}

int count_distinct(const std::vector<int>& colors) {
  return colors.empty() ? 0 : *std::max_element(colors.begin(), colors.end()) + 1;
}

std::vector<std::vector<int>> neighbour_lists(const Graph& g) {
  std::vector<std::vector<int>> nbrs(g.n());
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      if (i != j && g.has_edge(i, j)) nbrs[i].push_back(j);
    }
  }
  return nbrs;
}

std::vector<std::pair<int, int>> histogram_of(const std::vector<int>& colors, std::size_t begin, std::size_t end) {
  std::map<int, int> counts;
  for (std::size_t v = begin; v < end; ++v) ++counts[colors[v]];
  return {counts.begin(), counts.end()};
}

using Walks = std::vector<std::uint64_t>;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t r = a + b;
  return r < a ? std::numeric_limits<std::uint64_t>::max() : r;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

Walks multiply(const Walks& a, const Walks& b, int n) {
  Walks c(a.size(), 0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const std::uint64_t aik = a[i * n + k];
      if (aik == 0) continue;
      for (int j = 0; j < n; ++j) c[i * n + j] = sat_add(c[i * n + j], sat_mul(aik, b[k * n + j]));
    }
  }
  return c;
}

}  // namespace

Coloring wl_refine(const Graph& g, int max_rounds) {
  std::vector<double> labels(g.n());
  for (int v = 0; v < g.n(); ++v) labels[v] = g.at(v, v);
  const auto nbrs = neighbour_lists(g);

  Coloring c;
  c.colors = label_colors(labels);
  int classes = count_distinct(c.colors);
  while (c.rounds < max_rounds) {
    std::vector<int> next = refine_once(c.colors, nbrs);
    ++c.rounds;
    const int next_classes = count_distinct(next);
    c.colors = std::move(next);
    if (next_classes == classes) {
      c.stable = true;
      break;
    }
    classes = next_classes;
  }
  c.histogram = histogram_of(c.colors, 0, c.colors.size());
  return c;
}

bool wl_distinguishes(const Graph& g1, const Graph& g2, int max_rounds) {
  if (g1.n() != g2.n()) return true;
  const int n = g1.n();
  Graph both = disjoint_union(g1, g2);
  for (int v = 0; v < n; ++v) {
    both.at(v, v) = g1.at(v, v);
    both.at(n + v, n + v) = g2.at(v, v);
  }
  std::vector<double> labels(2 * n);
  for (int v = 0; v < 2 * n; ++v) labels[v] = both.at(v, v);
  const auto nbrs = neighbour_lists(both);

  std::vector<int> colors = label_colors(labels);
  int classes = count_distinct(colors);
  for (int round = 0;; ++round) {
    if (histogram_of(colors, 0, n) != histogram_of(colors, n, 2 * n)) return true;
    if (round == max_rounds) return false;
    std::vector<int> next = refine_once(colors, nbrs);
    const int next_classes = count_distinct(next);
    colors = std::move(next);
    if (next_classes == classes) {
      return histogram_of(colors, 0, n) != histogram_of(colors, n, 2 * n);
    }
    classes = next_classes;
  }
}

std::vector<std::uint64_t> walk_counts(const Graph& g, std::uint64_t length) {
  const int n = g.n();
  Walks result(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) result[i * n + i] = 1;
  Walks base(result.size(), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) base[i * n + j] = (i != j && g.has_edge(i, j)) ? 1 : 0;
  while (length > 0) {
    if (length & 1) result = multiply(result, base, n);
    length >>= 1;
    if (length > 0) base = multiply(base, base, n);
  }
  return result;
}

Graph power_graph(const Graph& g, int t) {
  if (t < 0 || t > 62) throw ParameterError("power_graph: t must lie in [0, 62]");
  const int n = g.n();
  const Walks w = walk_counts(g, std::uint64_t{1} << t);
  Graph out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = w[i * n + j] > 0 ? 1.0 : 0.0;
  return out;
}

Graph reach_graph(const Graph& g, int t) {
  if (t < 0 || t > 62) throw ParameterError("reach_graph: t must lie in [0, 62]");
  const int n = g.n();
  Walks w(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w[i * n + j] = (i == j || g.has_edge(i, j)) ? 1 : 0;
  // With self loops, reachability in <= 2^(s+1) steps is the square of <= 2^s.
  for (int s = 0; s < t; ++s) {
    w = multiply(w, w, n);
    for (auto& e : w) e = e > 0 ? 1 : 0;
  }
  Graph out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = w[i * n + j] > 0 ? 1.0 : 0.0;
  return out;
}

Tensor adjacency_tensor(const Graph& g, int channel) { return Tensor::from_values({g.n(), g.n()}, g.channel(channel)); }

Tensor degree_matrix(const Graph& g) {
  const int n = g.n();
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += g.at(i, j);
    d[i * n + i] = row;
  }
  return Tensor::from_values({n, n}, std::move(d));
}

Tensor normalized_laplacian(const Graph& g) {
  const int n = g.n();
  std::vector<double> inv_sqrt(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += g.at(i, j);
    inv_sqrt[i] = row > 0.0 ? 1.0 / std::sqrt(row) : 0.0;
  }
  std::vector<double> l(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) l[i * n + j] = (i == j ? 1.0 : 0.0) - inv_sqrt[i] * g.at(i, j) * inv_sqrt[j];
  return Tensor::from_values({n, n}, std::move(l));
}

std::vector<double> spectral_fingerprint(const Graph& g, int round_to) {
  if (round_to < 0 || round_to > 15) throw ParameterError("spectral_fingerprint: round_to must lie in [0, 15]");
  Eigh e = sym_eigh(adjacency_tensor(g));
  const double scale = std::pow(10.0, round_to);
  std::vector<double> out;
  out.reserve(g.n());
  for (double v : e.values.values()) {
    double r = std::round(v * scale) / scale;
    out.push_back(r == 0.0 ? 0.0 : r);  // no negative zeros
  }
  return out;
}

std::string to_json(const Coloring& c) {
  nlohmann::json j;
  j["colors"] = c.colors;
  j["stable"] = c.stable;
  j["rounds"] = c.rounds;
  j["histogram"] = nlohmann::json::array();
  for (auto [color, count] : c.histogram) j["histogram"].push_back({color, count});
  return j.dump();
}

std::string fingerprint_to_json(const std::vector<double>& fingerprint) { return nlohmann::json(fingerprint).dump(); }

}  // namespace ringgnn
