#include <Eigen/Dense>

#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "ringgnn/equivariant.hpp"
#include "ringgnn/graph.hpp"

using namespace ringgnn;

namespace {

std::vector<double> values_of(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

Tensor adjacency(const Graph& g) { return Tensor::from_values({g.n(), g.n()}, g.channel(0)); }

}  // namespace

TEST_CASE("mu classes: 15 canonical patterns partition [n]^4") {
  const auto& all = mu_classes();
  std::set<MuClass> unique(all.begin(), all.end());
  CHECK(unique.size() == 15);
  CHECK(all[0].to_string() == "(1,2,3,4)");
  CHECK(all[10].to_string() == "(1,2,3,3)");
  CHECK(all[14].to_string() == "(1,1,1,1)");
  for (int n : {4, 5}) {
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = 0; a2 < n; ++a2)
        for (int b1 = 0; b1 < n; ++b1)
          for (int b2 = 0; b2 < n; ++b2) {
            int hits = 0;
            for (const auto& mu : all) hits += mu_membership({a1, a2}, {b1, b2}, mu);
            CHECK(hits == 1);
          }
  }
  CHECK(mu_membership({0, 1}, {2, 3}, MuClass{{1, 2, 3, 4}}));
  CHECK(mu_membership({0, 1}, {1, 2}, MuClass{{1, 2, 2, 3}}));
  CHECK(mu_membership({0, 0}, {0, 0}, MuClass{{1, 1, 1, 1}}));
  CHECK_FALSE(mu_membership({0, 1}, {1, 2}, MuClass{{1, 2, 3, 4}}));
  CHECK_THROWS_AS(mu_index(MuClass{{2, 1, 3, 4}}), ParameterError);
}

TEST_CASE("mu_transpose is an involution and gives the operator adjoint") {
  std::mt19937_64 rng(8);
  const int n = 5;
  for (const auto& mu : mu_classes()) {
    CHECK(mu_transpose(mu_transpose(mu)) == mu);
    auto x = oracle::random_values(n * n, rng);
    auto y = oracle::random_values(n * n, rng);
    auto lx = oracle::naive_basis(x, n, mu);
    auto lty = oracle::naive_basis(y, n, mu_transpose(mu));
    double lhs = 0.0, rhs = 0.0;
    for (int e = 0; e < n * n; ++e) {
      lhs += y[e] * lx[e];
      rhs += lty[e] * x[e];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("apply_basis matches the naive O(n^4) sum") {
  std::mt19937_64 rng(9);
  for (int n = 1; n <= 8; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      auto x = oracle::random_values(n * n, rng);
      Tensor xt = Tensor::from_values({n, n}, x);
      std::vector<double> all(15 * n * n);
      apply_all_bases(x, n, all);
      for (int i = 0; i < kBasisCount; ++i) {
        const auto& mu = mu_classes()[i];
        auto ref = oracle::naive_basis(x, n, mu);
        CHECK(oracle::max_abs_diff(values_of(apply_basis(xt, mu)), ref) <= 1e-12);
        CHECK(oracle::max_abs_diff(std::span<const double>(all).subspan(i * n * n, n * n), ref) <= 1e-12);
      }
    }
  }
}

TEST_CASE("apply_basis examples") {
  std::mt19937_64 rng(10);
  auto x = oracle::random_values(16, rng);
  auto out = values_of(apply_basis(Tensor::from_values({4, 4}, x), MuClass{{1, 2, 1, 2}}));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(out[i * 4 + j] == (i == j ? 0.0 : x[i * 4 + j]));

  auto id = values_of(apply_basis(Tensor::identity(3), MuClass{{1, 1, 1, 1}}));
  CHECK(id == values_of(Tensor::identity(3)));

  // Every edge b of G_{8,2}: 18 edges a disjoint from b.
  Graph g = generate_csl(8, 2);
  auto full = values_of(apply_basis(adjacency(g), MuClass{{1, 2, 3, 4}}));
  for (auto [i, j] : g.edges()) {
    CHECK(full[i * 8 + j] == 18.0);
    CHECK(full[j * 8 + i] == 18.0);
  }
}

TEST_CASE("basis and bias maps are equivariant") {
  std::mt19937_64 rng(11);
  const int n = 7;
  for (int trial = 0; trial < 10; ++trial) {
    auto x = oracle::random_values(n * n, rng);
    Permutation p = Permutation::random(n, rng);
    auto px = oracle::conjugate(x, n, p.mapping());
    for (const auto& mu : mu_classes()) {
      auto lhs = values_of(apply_basis(Tensor::from_values({n, n}, px), mu));
      auto rhs = oracle::conjugate(values_of(apply_basis(Tensor::from_values({n, n}, x), mu)), n, p.mapping());
      CHECK(oracle::max_abs_diff(lhs, rhs) <= 1e-10);
    }
    for (BiasClass b : {BiasClass::kOffDiagonal, BiasClass::kDiagonal}) {
      auto bias = values_of(apply_bias(b, n));
      CHECK(oracle::conjugate(bias, n, p.mapping()) == bias);
    }
  }
}

TEST_CASE("the 15 basis maps are linearly independent for n >= 4") {
  // As operators: column e of L_i is L_i applied to the e-th unit matrix.
  for (int n : {4, 5, 6}) {
    Eigen::MatrixXd m(n * n * n * n, 15);
    for (int i = 0; i < 15; ++i) {
      for (int e = 0; e < n * n; ++e) {
        std::vector<double> unit(n * n, 0.0);
        unit[e] = 1.0;
        auto out = oracle::naive_basis(unit, n, mu_classes()[i]);
        for (int r = 0; r < n * n; ++r) m(e * n * n + r, i) = out[r];
      }
    }
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(m).rank() == 15);
  }
  // Evaluated on one fixed input the outputs satisfy two data-dependent
  // relations (the classes summing to the trace, and those summing to the
  // off-diagonal total, on each of the two supports), so they span only 13.
  // Two independent inputs side by side recover all 15.
  std::mt19937_64 rng(12);
  for (int n : {4, 5, 6}) {
    auto x = oracle::random_values(n * n, rng);
    auto y = oracle::random_values(n * n, rng);
    Eigen::MatrixXd single(n * n, 15), both(2 * n * n, 15);
    for (int i = 0; i < 15; ++i) {
      auto ox = oracle::naive_basis(x, n, mu_classes()[i]);
      auto oy = oracle::naive_basis(y, n, mu_classes()[i]);
      for (int e = 0; e < n * n; ++e) {
        single(e, i) = ox[e];
        both(e, i) = ox[e];
        both(n * n + e, i) = oy[e];
      }
    }
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(single).rank() == 13);
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(both).rank() == 15);
  }
}

TEST_CASE("apply_bias") {
  CHECK(values_of(apply_bias(BiasClass::kDiagonal, 3)) == values_of(Tensor::identity(3)));
  CHECK(values_of(apply_bias(BiasClass::kOffDiagonal, 2)) == std::vector<double>{0, 1, 1, 0});
  auto sum4 = values_of(add(apply_bias(BiasClass::kDiagonal, 4), apply_bias(BiasClass::kOffDiagonal, 4)));
  for (double v : sum4) CHECK(v == 1.0);
}

TEST_CASE("apply_basis gradient matches finite differences") {
  std::mt19937_64 rng(13);
  const int n = 5;
  Tensor x = Tensor::from_values({n, n}, oracle::random_values(n * n, rng)).set_requires_grad();
  Tensor w = Tensor::from_values({n, n}, oracle::random_values(n * n, rng));
  for (const auto& mu : mu_classes()) {
    x.zero_grad();
    auto f = [&] { return sum(mul(apply_basis(x, mu), w)); };
    f().backward();
    std::vector<double> analytic(x.grad().begin(), x.grad().end());
    auto numeric = oracle::finite_difference(x, [&] { return f().item(); });
    CHECK(oracle::max_relative_error(analytic, numeric) <= 1e-5);
  }
}

TEST_CASE("equivariant_layer: zero weights, identity selection, dimension errors") {
  std::mt19937_64 rng(14);
  const int n = 6;
  Tensor x = Tensor::from_values({2, n, n}, oracle::random_values(2 * n * n, rng));
  Tensor zero = Tensor::zeros({2, 3, kLayerWeights});
  Tensor zero_out = equivariant_layer(x, zero);
  for (double v : zero_out.values()) CHECK(v == 0.0);

  Tensor x1 = Tensor::from_values({1, n, n}, oracle::random_values(n * n, rng));
  Tensor theta = Tensor::zeros({1, 1, kLayerWeights});
  theta.mutable_values()[mu_index(MuClass{{1, 2, 1, 2}})] = 1.0;
  theta.mutable_values()[mu_index(MuClass{{1, 1, 1, 1}})] = 1.0;
  CHECK(oracle::max_abs_diff(equivariant_layer(x1, theta).values(), x1.values()) <= 1e-15);

  CHECK_THROWS_AS(equivariant_layer(x, Tensor::zeros({1, 3, kLayerWeights})), DimensionError);
  CHECK_THROWS_AS(equivariant_layer(x, Tensor::zeros({2, 3, 15})), DimensionError);
  CHECK_THROWS_AS(equivariant_layer(Tensor::zeros({2, 3, 4}), zero), DimensionError);
}

TEST_CASE("equivariant_layer equals the naive composition, with and without normalisation") {
  std::mt19937_64 rng(15);
  const int n = 5, d = 2, dp = 3;
  auto xv = oracle::random_values(d * n * n, rng);
  auto tv = oracle::random_values(d * dp * kLayerWeights, rng);
  Tensor x = Tensor::from_values({d, n, n}, xv);
  Tensor theta = Tensor::from_values({d, dp, kLayerWeights}, tv);
  for (bool normalize : {false, true}) {
    auto out = values_of(equivariant_layer(x, theta, normalize));
    std::vector<double> ref(dp * n * n, 0.0);
    for (int k = 0; k < d; ++k) {
      std::vector<double> xk(xv.begin() + k * n * n, xv.begin() + (k + 1) * n * n);
      for (int kp = 0; kp < dp; ++kp) {
        const double* th = &tv[(k * dp + kp) * kLayerWeights];
        for (int i = 0; i < kBasisCount; ++i) {
          auto li = oracle::naive_basis(xk, n, mu_classes()[i]);
          const double f = normalize ? std::pow(n, -mu_free_indices(mu_classes()[i])) : 1.0;
          for (int e = 0; e < n * n; ++e) ref[kp * n * n + e] += th[i] * f * li[e];
        }
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) ref[kp * n * n + r * n + c] += r == c ? th[16] : th[15];
      }
    }
    CHECK(oracle::max_abs_diff(out, ref) <= 1e-12);
  }
}

TEST_CASE("equivariant_layer is permutation equivariant (100 random trials)") {
  std::mt19937_64 rng(16);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 6, d = 1 + trial % 3, dp = 1 + (trial / 3) % 3;
    auto xv = oracle::random_values(d * n * n, rng);
    Tensor theta = Tensor::from_values({d, dp, kLayerWeights}, oracle::random_values(d * dp * kLayerWeights, rng));
    Permutation p = Permutation::random(n, rng);
    std::vector<double> pxv;
    for (int k = 0; k < d; ++k) {
      auto c = oracle::conjugate(std::vector<double>(xv.begin() + k * n * n, xv.begin() + (k + 1) * n * n), n,
                                 p.mapping());
      pxv.insert(pxv.end(), c.begin(), c.end());
    }
    auto lhs = values_of(equivariant_layer(Tensor::from_values({d, n, n}, pxv), theta));
    auto out = values_of(equivariant_layer(Tensor::from_values({d, n, n}, xv), theta));
    for (int kp = 0; kp < dp; ++kp) {
      auto c = oracle::conjugate(std::vector<double>(out.begin() + kp * n * n, out.begin() + (kp + 1) * n * n), n,
                                 p.mapping());
      worst = std::max(worst, oracle::max_abs_diff(std::span<const double>(lhs).subspan(kp * n * n, n * n), c));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("equivariant_layer gradients match finite differences") {
  std::mt19937_64 rng(17);
  const int n = 5, d = 2, dp = 3;
  Tensor x = Tensor::from_values({d, n, n}, oracle::random_values(d * n * n, rng)).set_requires_grad();
  Tensor theta =
      Tensor::from_values({d, dp, kLayerWeights}, oracle::random_values(d * dp * kLayerWeights, rng)).set_requires_grad();
  Tensor w = Tensor::from_values({dp, n, n}, oracle::random_values(dp * n * n, rng));
  for (bool normalize : {false, true}) {
    auto f = [&] { return sum(mul(equivariant_layer(x, theta, normalize), w)); };
    for (Tensor* leaf : {&x, &theta}) {
      x.zero_grad();
      theta.zero_grad();
      f().backward();
      std::vector<double> analytic(leaf->grad().begin(), leaf->grad().end());
      auto numeric = oracle::finite_difference(*leaf, [&] { return f().item(); });
      CHECK(oracle::max_relative_error(analytic, numeric) <= 1e-5);
    }
  }
}

TEST_CASE("invariant_readout") {
  CHECK(invariant_readout(Tensor::identity(3), 1, 0).item() == 3.0);
  Graph g = generate_csl(8, 2);
  CHECK(invariant_readout(adjacency(g), 0, 1).item() == 32.0);
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 10; ++trial) {
    Graph r = generate_random_regular(10, 3, trial);
    Graph pr = apply_permutation(r, Permutation::random(10, rng));
    CHECK(invariant_readout(adjacency(r), 0.7, -1.3).item() == invariant_readout(adjacency(pr), 0.7, -1.3).item());
  }
}

TEST_CASE("count tables: closed forms match brute force") {
  for (auto [n, d] : std::vector<std::pair<int, int>>{{8, 4}, {10, 3}, {12, 4}, {16, 5}, {7, 2}}) {
    CountTableReport r = verify_count_tables(n, d, 1);
    CHECK(r.all_match());
    CHECK(r.cells.size() == 135);
    long long grand[3] = {0, 0, 0};
    for (const auto& c : r.cells) grand[static_cast<int>(c.tau)] += c.brute_force;
    for (long long g : grand) CHECK(g == static_cast<long long>(n) * n);
  }
  CHECK(closed_form_count(PairSet::kEdge, PairSet::kEdge, MuClass{{1, 2, 3, 4}}, 8, 4) == 18);
  CHECK(closed_form_count(PairSet::kEdge, PairSet::kSelf, MuClass{{1, 2, 3, 3}}, 8, 4) == 24);
  for (PairSet tau : {PairSet::kEdge, PairSet::kNonEdge, PairSet::kSelf}) {
    long long total = 0;
    for (const auto& mu : mu_classes()) total += closed_form_count(PairSet::kSelf, tau, mu, 9, 4);
    CHECK(total == 9);
  }
  CountTableReport r = compute_count_tables(8, 4, 3);
  std::string csv = r.to_csv();
  CHECK(csv.rfind("mu,tau,counter,closed_form,brute_force,match\n", 0) == 0);
  CHECK(csv.find("\"(1,2,3,4)\",E,m_E,18,18,true") != std::string::npos);
  CHECK(csv.find("Total,S,m_S,8,8,true") != std::string::npos);
  CHECK_THROWS_AS(verify_count_tables(8, 7, 1), ParameterError);
}
