#include "ringgnn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ringgnn/equivariant.hpp"
#include "ringgnn/graph_ops.hpp"
#include "ringgnn/models.hpp"

namespace ringgnn {

namespace {

std::vector<double> random_matrix(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n) * n);
  for (double& v : x) v = u(rng);
  return x;
}

// (pi^T x pi)[i][j] = x[p(i)][p(j)]
std::vector<double> conjugate(const std::vector<double>& x, int n, const Permutation& p) {
  std::vector<double> y(x.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) y[i * n + j] = x[p(i) * n + p(j)];
  }
  return y;
}

// All 17 operator outputs of x, 15 bases then the two biases.
std::vector<std::vector<double>> all_operators(const std::vector<double>& x, int n) {
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  std::vector<double> flat(nn * kBasisCount);
  apply_all_bases(x, n, flat);
  std::vector<std::vector<double>> out;
  for (int i = 0; i < kBasisCount; ++i) out.emplace_back(flat.begin() + i * nn, flat.begin() + (i + 1) * nn);
  for (BiasClass b : {BiasClass::kOffDiagonal, BiasClass::kDiagonal}) {
    const Tensor t = apply_bias(b, n);
    out.emplace_back(t.values().begin(), t.values().end());
  }
  return out;
}

std::string operator_name(int i) {
  if (i < kBasisCount) return "basis " + mu_classes()[i].to_string();
  return i == kBasisCount ? "off-diagonal bias" : "diagonal bias";
}

void finish(SuiteResult& r) {
  r.passed = r.max_deviation <= r.tolerance;
  if (r.detail.empty()) {
    std::ostringstream s;
    s << r.checks << " checks, max deviation " << r.max_deviation;
    r.detail = s.str();
  }
}

bool certified_distinct(const Graph& a, const Graph& b) {
  if (a.n() <= kMaxExhaustiveNodes) return !are_isomorphic(a, b);
  return spectral_fingerprint(a) != spectral_fingerprint(b);
}

}  // namespace

SuiteResult verify_equivariance(int n_min, int n_max, int trials, std::uint64_t seed, double tol) {
  if (n_min < 1 || n_max < n_min || trials < 1) throw ParameterError("verify_equivariance: bad range");
  SuiteResult r{"equivariance", false, 0.0, tol, 0, ""};
  std::mt19937_64 rng(seed);
  for (int n = n_min; n <= n_max; ++n) {
    for (int trial = 0; trial < trials; ++trial) {
      const auto x = random_matrix(n, rng);
      const Permutation p = Permutation::random(n, rng);
      const auto before = all_operators(conjugate(x, n, p), n);
      const auto after = all_operators(x, n);
      for (int op = 0; op < kLayerWeights; ++op) {
        const auto moved = conjugate(after[op], n, p);
        double dev = 0.0;
        for (std::size_t e = 0; e < moved.size(); ++e) dev = std::max(dev, std::abs(moved[e] - before[op][e]));
        ++r.checks;
        if (dev > r.max_deviation) r.max_deviation = dev;
        if (dev > tol && r.detail.empty()) {
          r.detail = operator_name(op) + " fails at n = " + std::to_string(n);
        }
      }
    }
  }
  finish(r);
  return r;
}

SuiteResult verify_basis_closed_forms(int n_max, int inputs, std::uint64_t seed, double tol) {
  if (n_max < 1 || inputs < 1) throw ParameterError("verify_basis_closed_forms: bad range");
  SuiteResult r{"basis closed forms", false, 0.0, tol, 0, ""};
  std::mt19937_64 rng(seed);
  for (int n = 1; n <= n_max; ++n) {
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    // Class of every (a1, a2, b1, b2), computed once per n.
    std::vector<int> cls(nn * nn);
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = 0; a2 < n; ++a2)
        for (int b1 = 0; b1 < n; ++b1)
          for (int b2 = 0; b2 < n; ++b2)
            cls[(static_cast<std::size_t>(a1 * n + a2)) * nn + b1 * n + b2] = mu_index(mu_of(a1, a2, b1, b2));
    for (int input = 0; input < inputs; ++input) {
      const auto x = random_matrix(n, rng);
      std::vector<double> naive(nn * kBasisCount, 0.0);
      for (std::size_t a = 0; a < nn; ++a) {
        for (std::size_t b = 0; b < nn; ++b) naive[cls[a * nn + b] * nn + b] += x[a];
      }
      std::vector<double> fast(nn * kBasisCount);
      apply_all_bases(x, n, fast);
      for (int i = 0; i < kBasisCount; ++i) {
        double dev = 0.0;
        for (std::size_t e = 0; e < nn; ++e) dev = std::max(dev, std::abs(fast[i * nn + e] - naive[i * nn + e]));
        ++r.checks;
        r.max_deviation = std::max(r.max_deviation, dev);
        if (dev > tol && r.detail.empty()) r.detail = operator_name(i) + " fails at n = " + std::to_string(n);
      }
    }
  }
  finish(r);
  return r;
}

std::vector<RegularPair> regular_pairs(int count, std::uint64_t seed) {
  if (count < 0) throw ParameterError("regular_pairs: count must be nonnegative");
  std::vector<std::pair<int, int>> shapes;  // (n, degree)
  for (int n = 6; n <= 16; ++n) {
    for (int d = 2; d <= 5 && d <= n - 3; ++d) {
      if (n * d % 2 == 0) shapes.emplace_back(n, d);
    }
  }
  std::vector<RegularPair> pairs;
  constexpr int kSearch = 40;
  for (std::uint64_t round = 0; round < 8 && static_cast<int>(pairs.size()) < count; ++round) {
    for (auto [n, d] : shapes) {
      if (static_cast<int>(pairs.size()) >= count) break;
      const std::uint64_t base = seed * 1000003 + round * 1009;
      Graph first = generate_random_regular(n, d, base);
      for (int s = 1; s <= kSearch; ++s) {
        Graph second = generate_random_regular(n, d, base + s);
        if (certified_distinct(first, second)) {
          pairs.push_back({std::move(first), std::move(second), d});
          break;
        }
      }
    }
  }
  if (static_cast<int>(pairs.size()) < count) {
    throw RetryExhaustedError("regular_pairs: found only " + std::to_string(pairs.size()) + " pairs");
  }
  return pairs;
}

SuiteResult verify_regular_theorem(int pairs, int draws, std::uint64_t seed, double tol) {
  if (pairs < 1 || draws < 1) throw ParameterError("verify_regular_theorem: pairs and draws must be positive");
  SuiteResult r{"regular-graph indistinguishability", false, 0.0, tol, 0, ""};
  const auto graphs = regular_pairs(pairs, seed);
  std::vector<std::pair<PreparedGraph, PreparedGraph>> prepared;
  for (const auto& p : graphs) prepared.emplace_back(prepare_graph(p.first), prepare_graph(p.second));

  std::mt19937_64 rng(seed ^ 0x5bd1e995u);
  std::uniform_int_distribution<int> layers(1, 3), width(1, 8);
  for (int draw = 0; draw < draws; ++draw) {
    Order2Config cfg;
    cfg.widths = {1};
    const int depth = layers(rng);
    for (int t = 0; t < depth; ++t) cfg.widths.push_back(width(rng));
    cfg.mlp_hidden = {width(rng)};
    cfg.classes = 2;
    cfg.normalize = draw % 2 == 1;
    const ParameterSet ps = init_order2(cfg, rng);
    for (std::size_t k = 0; k < prepared.size(); ++k) {
      const Tensor a = order2_forward(prepared[k].first, ps, cfg);
      const Tensor b = order2_forward(prepared[k].second, ps, cfg);
      double scale = 1.0, diff = 0.0;
      for (std::size_t i = 0; i < a.values().size(); ++i) {
        scale = std::max({scale, std::abs(a.values()[i]), std::abs(b.values()[i])});
        diff = std::max(diff, std::abs(a.values()[i] - b.values()[i]));
      }
      const double dev = diff / scale;
      ++r.checks;
      r.max_deviation = std::max(r.max_deviation, dev);
      if (dev > tol && r.detail.empty()) {
        std::ostringstream s;
        s << "draw " << draw << " separates pair " << k << " (n = " << graphs[k].first.n()
          << ", degree " << graphs[k].degree << ")";
        r.detail = s.str();
      }
    }
  }
  finish(r);
  return r;
}

}  // namespace ringgnn
