#pragma once
// Test-only reference implementations. Deliberately naive: they share no code
// with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ringgnn/equivariant.hpp"
#include "ringgnn/graph.hpp"
#include "ringgnn/tensor.hpp"

namespace oracle {

inline bool same_pattern(int a1, int a2, int b1, int b2, const std::array<int, 4>& pat) {
  const int t[4] = {a1, a2, b1, b2};
  for (int p = 0; p < 4; ++p) {
    for (int q = 0; q < 4; ++q) {
      if ((t[p] == t[q]) != (pat[p] == pat[q])) return false;
    }
  }
  return true;
}

// output[b] = sum_{a : (a,b) in mu} x[a], as a plain O(n^4) loop.
inline std::vector<double> naive_basis(const std::vector<double>& x, int n, const ringgnn::MuClass& mu) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int b1 = 0; b1 < n; ++b1)
    for (int b2 = 0; b2 < n; ++b2)
      for (int a1 = 0; a1 < n; ++a1)
        for (int a2 = 0; a2 < n; ++a2)
          if (same_pattern(a1, a2, b1, b2, mu.pattern)) out[b1 * n + b2] += x[a1 * n + a2];
  return out;
}

inline std::vector<double> random_values(std::size_t count, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(count);
  for (double& e : v) e = u(rng);
  return v;
}

// pi^T X pi on an n x n row-major matrix: out[i][j] = x[p(i)][p(j)].
inline std::vector<double> conjugate(const std::vector<double>& x, int n, const std::vector<int>& p) {
  std::vector<double> out(x.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i * n + j] = x[p[i] * n + p[j]];
  return out;
}

// Number of walks of length 2 from i to j.
inline std::vector<double> two_paths(const ringgnn::Graph& g) {
  const int n = g.n();
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        if (g.has_edge(i, m) && g.has_edge(m, j)) out[i * n + j] += 1.0;
  return out;
}

// Central differences of a scalar function of `leaf`'s values.
inline std::vector<double> finite_difference(ringgnn::Tensor leaf, const std::function<double()>& f,
                                             double step = 1e-6) {
  auto v = leaf.mutable_values();
  std::vector<double> grad(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + step;
    const double up = f();
    v[i] = keep - step;
    const double down = f();
    v[i] = keep;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

inline double max_relative_error(std::span<const double> a, std::span<const double> b) {
  double scale = 1e-8, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::max(std::abs(a[i]), std::abs(b[i])));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / scale;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  return diff;
}

// Number of nodes of the circulant graph C_n(1, k) that node 0 reaches by a
// walk of exactly `length` steps, or of at most `length` steps. Set-valued
// walk simulation, independent of any matrix code.
inline int circulant_reach(int n, int k, int length, bool at_most) {
  std::vector<char> cur(n, 0), seen(n, 0);
  cur[0] = 1;
  seen[0] = 1;
  for (int step = 0; step < length; ++step) {
    std::vector<char> next(n, 0);
    for (int v = 0; v < n; ++v) {
      if (!cur[v]) continue;
      for (int s : {1, -1, k, -k}) next[((v + s) % n + n) % n] = 1;
    }
    cur = next;
    for (int v = 0; v < n; ++v) seen[v] |= cur[v];
  }
  int count = 0;
  for (int v = 0; v < n; ++v) count += at_most ? seen[v] : cur[v];
  return count;
}

// Smallest edge bitmask over all n! relabellings (pairs (i, j), i < j, in
// row-major order). Two graphs are isomorphic iff their forms agree.
inline std::uint64_t canonical_form(const ringgnn::Graph& g) {
  const int n = g.n();
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  std::uint64_t best = ~std::uint64_t{0};
  do {
    std::uint64_t mask = 0;
    int bit = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++bit) {
        if (g.has_edge(p[i], p[j])) mask |= std::uint64_t{1} << bit;
      }
    }
    best = std::min(best, mask);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// det(x I - A) for x = 0..n by fraction-free (Bareiss) elimination in
// integers. Equal vectors <=> equal characteristic polynomials <=> cospectral.
inline std::vector<long long> char_poly_values(const ringgnn::Graph& g) {
  const int n = g.n();
  std::vector<long long> out;
  for (int x = 0; x <= n; ++x) {
    std::vector<std::vector<long long>> m(n, std::vector<long long>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[i][j] = (i == j ? x : 0) - static_cast<long long>(g.at(i, j));
    long long sign = 1, prev = 1;
    bool zero = false;
    for (int k = 0; k < n && !zero; ++k) {
      int piv = k;
      while (piv < n && m[piv][k] == 0) ++piv;
      if (piv == n) {
        zero = true;
        break;
      }
      if (piv != k) {
        std::swap(m[piv], m[k]);
        sign = -sign;
      }
      for (int i = k + 1; i < n; ++i) {
        for (int j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      }
      prev = m[k][k];
    }
    out.push_back(zero ? 0 : (n == 0 ? 1 : sign * m[n - 1][n - 1]));
  }
  return out;
}

}  // namespace oracle
