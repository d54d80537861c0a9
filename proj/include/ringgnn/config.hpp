#pragma once

#include <string>

#include "ringgnn/training.hpp"

namespace ringgnn {

// Experiment config files: '#' or ';' comments, [section] headers and
// `key = value` lines. Lists are comma separated, booleans true/false.
//
//   preset = csl-gin          (optional, top level: start from a preset)
//   name = GIN                (top level: model label in the summary)
//   [dataset]   kind = csl|tu; csl: n, skips, copies, permute_seed; tu: path
//   [model]     family = order2|ring-gnn|sgnn|gin, then per family:
//               order2:   widths, mlp_hidden, normalize
//               ring-gnn: widths, mlp_hidden, normalize, k1_mean, k1_std,
//                         k2_mean, k2_std, eigenvalues (0 = off), eigen_method
//               sgnn:     operators (I, D, P0, P1, ...), layers, width,
//                         scale_operators, power (exact|within)
//               gin:      layers, width, epsilon
//   [optimizer] kind = adam|sgd, lr, beta1, beta2, eps, clip (or none)
//   [training]  epochs, batch_size (0 = full batch), folds, seeds, threads,
//               protocol (final|fold-mean-epoch-max)
//
// Without a preset, model.family and dataset.kind are required. Unknown
// keys, keys that do not apply to the chosen family or dataset kind, and
// malformed values raise ConfigError naming the key and line.
ExperimentConfig parse_config(const std::string& text);

// A readable file is parsed; otherwise `source` is looked up as a preset
// name. ConfigError when it is neither.
ExperimentConfig load_config(const std::string& source);

// The full config in the format above; parse_config reads it back to an
// equal config.
std::string config_to_text(const ExperimentConfig& cfg);

}  // namespace ringgnn
