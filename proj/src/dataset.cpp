#include "ringgnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

namespace ringgnn {

namespace {

namespace fs = std::filesystem;

struct Row {
  int line = 0;
  std::vector<long long> values;
};

// Every non-blank line of `path` as integers; commas count as whitespace.
std::vector<Row> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::vector<Row> rows;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::replace(text.begin(), text.end(), ',', ' ');
    Row row{line, {}};
    std::size_t pos = 0;
    while (true) {
      pos = text.find_first_not_of(" \t\r", pos);
      if (pos == std::string::npos) break;
      const std::size_t end = std::min(text.find_first_of(" \t\r", pos), text.size());
      long long v = 0;
      auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, v);
      if (ec != std::errc() || ptr != text.data() + end) {
        throw IngestionError(path.string() + ":" + std::to_string(line) + ": not an integer: '" +
                             text.substr(pos, end - pos) + "'");
      }
      row.values.push_back(v);
      pos = end;
    }
    if (!row.values.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

[[noreturn]] void fail(const fs::path& path, int line, const std::string& what) {
  throw IngestionError(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

double Dataset::mean_nodes() const {
  if (graphs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& g : graphs) total += g.n();
  return total / static_cast<double>(graphs.size());
}

Dataset make_csl_dataset(const CslSpec& spec) {
  if (spec.skips.empty()) throw ParameterError("csl: skip set must be nonempty");
  if (spec.copies < 1) throw ParameterError("csl: copies must be positive");
  Dataset d;
  d.name = "CSL";
  d.classes = static_cast<int>(spec.skips.size());
  std::mt19937_64 rng(spec.permute_seed);
  for (int c = 0; c < d.classes; ++c) {
    const Graph base = generate_csl(spec.n, spec.skips[c]);
    for (int copy = 0; copy < spec.copies; ++copy) {
      d.graphs.push_back(apply_permutation(base, Permutation::random(spec.n, rng)));
      d.labels.push_back(c);
    }
  }
  return d;
}

Dataset ingest_tu(const std::string& directory) {
  const fs::path dir(directory);
  std::string name = dir.filename().string();
  if (name.empty()) name = dir.parent_path().filename().string();
  if (!fs::is_directory(dir)) throw IngestionError("not a directory: " + directory);
  const fs::path a_path = dir / (name + "_A.txt");
  const fs::path ind_path = dir / (name + "_graph_indicator.txt");
  const fs::path lab_path = dir / (name + "_graph_labels.txt");
  for (const auto& p : {a_path, ind_path, lab_path}) {
    if (!fs::exists(p)) throw IngestionError("missing file " + p.string());
  }

  // Node -> graph.
  const auto indicator = read_rows(ind_path);
  const auto label_rows = read_rows(lab_path);
  const long long graph_count = static_cast<long long>(label_rows.size());
  std::vector<int> node_graph;
  std::vector<int> node_local;
  std::vector<int> sizes(graph_count, 0);
  for (const auto& row : indicator) {
    if (row.values.size() != 1) fail(ind_path, row.line, "expected one graph id");
    const long long gid = row.values[0];
    if (gid < 1 || gid > graph_count) {
      fail(ind_path, row.line, "graph id " + std::to_string(gid) + " outside 1.." + std::to_string(graph_count));
    }
    node_graph.push_back(static_cast<int>(gid - 1));
    node_local.push_back(sizes[gid - 1]++);
  }

  Dataset d;
  d.name = name;
  d.graphs.reserve(graph_count);
  for (long long g = 0; g < graph_count; ++g) d.graphs.emplace_back(sizes[g]);

  const long long node_count = static_cast<long long>(node_graph.size());
  for (const auto& row : read_rows(a_path)) {
    if (row.values.size() != 2) fail(a_path, row.line, "expected an edge 'i, j'");
    const long long u = row.values[0], v = row.values[1];
    for (long long id : {u, v}) {
      if (id < 1 || id > node_count) {
        fail(a_path, row.line, "dangling node id " + std::to_string(id) + " (" + std::to_string(node_count) +
                                   " nodes in the graph indicator)");
      }
    }
    const int gu = node_graph[u - 1], gv = node_graph[v - 1];
    if (gu != gv) fail(a_path, row.line, "edge joins nodes of different graphs");
    const int i = node_local[u - 1], j = node_local[v - 1];
    if (i == j) continue;  // self loops carry no adjacency information here
    d.graphs[gu].at(i, j) = 1.0;
    d.graphs[gu].at(j, i) = 1.0;
  }

  std::map<long long, int> remap;
  for (const auto& row : label_rows) {
    if (row.values.size() != 1) fail(lab_path, row.line, "expected one label");
    remap.emplace(row.values[0], 0);
  }
  int next = 0;
  for (auto& [raw, idx] : remap) idx = next++;
  for (const auto& row : label_rows) d.labels.push_back(remap.at(row.values[0]));
  d.classes = next;
  for (long long g = 0; g < graph_count; ++g) {
    if (sizes[g] == 0) throw IngestionError(ind_path.string() + ": graph " + std::to_string(g + 1) + " has no nodes");
  }
  return d;
}

}  // namespace ringgnn
