#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ringgnn/tensor.hpp"

namespace ringgnn {

// Equality pattern of a 4-tuple (a1, a2, b1, b2) in first-occurrence form,
// e.g. (1,2,2,3) means a2 == b1 and all other positions differ. The pair a
// indexes the input matrix, b the output matrix.
struct MuClass {
  std::array<int, 4> pattern{1, 2, 3, 4};

  auto operator<=>(const MuClass&) const = default;
  std::string to_string() const;  // "(1,2,3,4)"
};

inline constexpr int kBasisCount = 15;
inline constexpr int kBiasCount = 2;
inline constexpr int kLayerWeights = kBasisCount + kBiasCount;

// The 15 classes in canonical order; parameter slot i uses classes()[i].
const std::array<MuClass, kBasisCount>& mu_classes();
int mu_index(const MuClass& mu);
MuClass mu_of(int a1, int a2, int b1, int b2);
// The class of (b, a) for (a, b) in mu; its operator is the adjoint.
MuClass mu_transpose(const MuClass& mu);
// Number of summed indices in the class (0, 1 or 2).
int mu_free_indices(const MuClass& mu);

bool mu_membership(std::pair<int, int> a, std::pair<int, int> b, const MuClass& mu);

enum class BiasClass {
  kOffDiagonal,  // pattern (1,2)
  kDiagonal,     // pattern (1,1)
};

// Writes all 15 basis outputs of the n x n matrix `x` into `out`
// (15 consecutive n x n blocks). When `normalize` is set, class i is divided
// by n^free_indices(i).
void apply_all_bases(std::span<const double> x, int n, std::span<double> out, bool normalize = false);

// output[b] = sum over a with (a, b) in mu of x[a]; differentiable in x.
Tensor apply_basis(const Tensor& x, const MuClass& mu);
Tensor apply_bias(BiasClass bias, int n);

// Weights of one equivariant layer R^{n x n x d} -> R^{n x n x d'}: theta has
// shape [d, d', 17] with 15 basis weights then the off-diagonal and diagonal
// bias weights.
struct EquivariantLayerParams {
  int in_channels = 1;
  int out_channels = 1;
  Tensor theta;
};

// x: [d, n, n] -> [d', n, n]. Output channel k' is
//   sum_k sum_i theta[k,k',i] L_i(x_k) + sum_k theta[k,k',15] J_off + theta[k,k',16] I.
// Linear and differentiable in both x and theta.
Tensor equivariant_layer(const Tensor& x, const Tensor& theta, bool normalize = false);

// w_diag * trace(x) + w_offdiag * (sum of off-diagonal entries); x is [n, n].
Tensor invariant_readout(const Tensor& x, double w_diag, double w_offdiag);

// ---- count tables for regular graphs ----

enum class PairSet { kEdge, kNonEdge, kSelf };  // E, N, S
char pair_set_letter(PairSet s);

// Closed forms of m_counter(tau, mu) for a d-regular graph on n nodes.
long long closed_form_count(PairSet counter, PairSet tau, const MuClass& mu, long long n, long long d);

struct CountCell {
  MuClass mu;
  PairSet tau;
  PairSet counter;
  long long closed_form = 0;
  long long brute_force = 0;
  // Every b in tau gave the same brute-force count.
  bool uniform_over_b = true;
  bool match() const { return uniform_over_b && closed_form == brute_force; }
};

struct CountTotal {
  PairSet tau;
  PairSet counter;
  long long expected = 0;  // nd, n(n-d-1) or n
  long long brute_force = 0;
  bool match() const { return expected == brute_force; }
};

struct CountTableReport {
  int n = 0;
  int degree = 0;
  std::uint64_t seed = 0;
  std::vector<CountCell> cells;    // 15 mu x 3 tau x 3 counters
  std::vector<CountTotal> totals;  // 3 tau x 3 counters
  bool all_match() const;
  std::string to_csv() const;  // mu,tau,counter,closed_form,brute_force,match
};

// Brute-force m_E, m_N, m_S over every b of each set on a sampled d-regular
// graph and compares them with the closed forms.
CountTableReport compute_count_tables(int n, int degree, std::uint64_t seed);
// As above, but throws VerificationError naming the first mismatching cell.
CountTableReport verify_count_tables(int n, int degree, std::uint64_t seed);

}  // namespace ringgnn
