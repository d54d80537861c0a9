#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ringgnn/graph.hpp"

namespace ringgnn {

// Outcome of one verification suite. `max_deviation` is the worst error the
// suite saw, in the unit its tolerance is stated in.
struct SuiteResult {
  std::string name;
  bool passed = false;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  long long checks = 0;
  std::string detail;  // first failure, or a short description of the run
};

// All 15 bases and both biases satisfy f(pi^T x pi) = pi^T f(x) pi for
// n in [n_min, n_max], `trials` random (x, pi) per n. Max abs deviation.
SuiteResult verify_equivariance(int n_min, int n_max, int trials, std::uint64_t seed, double tol = 1e-10);

// Closed-form bases against the O(n^4) sum over the mu-class definition for
// n in [1, n_max], `inputs` random matrices per n. Max abs deviation.
SuiteResult verify_basis_closed_forms(int n_max, int inputs, std::uint64_t seed, double tol = 1e-12);

// Pairs of non-isomorphic regular graphs with equal (n, degree), n in
// [6, 16]. Non-isomorphism is certified by the exhaustive test for n <= 10
// and by differing spectra above that.
struct RegularPair {
  Graph first;
  Graph second;
  int degree = 0;
};
std::vector<RegularPair> regular_pairs(int count, std::uint64_t seed = 0);

// Random order-2 networks (1..3 layers, widths 1..8, normalisation on or
// off) evaluated on every pair. The deviation of a pair is
// max_i |f(G1)_i - f(G2)_i| / max(1, max_i |f(G1)_i|, max_i |f(G2)_i|).
SuiteResult verify_regular_theorem(int pairs, int draws, std::uint64_t seed, double tol = 1e-8);

}  // namespace ringgnn
