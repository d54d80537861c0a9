#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ringgnn/graph.hpp"

namespace ringgnn {

// Labelled graph collection. Labels are contiguous class indices from 0.
struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<int> labels;
  int classes = 0;

  std::size_t size() const { return graphs.size(); }
  double mean_nodes() const;
};

using TuDataset = Dataset;

// Circular skip-link benchmark: one class per skip length, `copies`
// uniformly random relabellings of G_{n,k} per class, class-major order.
struct CslSpec {
  int n = 41;
  std::vector<int> skips{2, 3, 4, 5, 6, 9, 11, 12, 13, 16};
  int copies = 15;
  std::uint64_t permute_seed = 0;
};

Dataset make_csl_dataset(const CslSpec& spec);

// Reads a dataset in the TU Dortmund layout from `directory`, whose last
// path component DS names the files DS_A.txt, DS_graph_indicator.txt and
// DS_graph_labels.txt. Ids in the files are 1-indexed; tokens may be
// separated by commas and/or whitespace. Graphs come out in graph-id order
// with nodes in file order, channel-0 diagonal left at 0.
Dataset ingest_tu(const std::string& directory);

}  // namespace ringgnn
