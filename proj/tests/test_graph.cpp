#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "ringgnn/graph.hpp"

using namespace ringgnn;

TEST_CASE("apply_permutation: identity and inverse round trip") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g = generate_random_regular(10, 3, 100 + trial);
    CHECK(apply_permutation(g, Permutation::identity(10)) == g);
    Permutation p = Permutation::random(10, rng);
    CHECK(apply_permutation(apply_permutation(g, p), p.inverse()) == g);
  }
}

TEST_CASE("apply_permutation: output[i][j] = g[p(i)][p(j)] on every channel") {
  Graph g(4, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : g.data()) v = u(rng);
  Permutation p({2, 0, 3, 1});
  Graph h = apply_permutation(g, p);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 2; ++k) CHECK(h.at(i, j, k) == g.at(p(i), p(j), k));
}

TEST_CASE("apply_permutation: CSL rotation and path reflection") {
  Graph csl = generate_csl(8, 2);
  CHECK(apply_permutation(csl, Permutation::rotation(8, 1)) == csl);
  Graph path = path_graph(3);
  CHECK(apply_permutation(path, Permutation({2, 1, 0})) == path);
  CHECK_THROWS_AS(apply_permutation(path, Permutation::identity(4)), DimensionError);
}

TEST_CASE("Permutation rejects non-bijections") {
  CHECK_THROWS_AS(Permutation({0, 0, 1}), ParameterError);
  CHECK_THROWS_AS(Permutation({0, 3}), ParameterError);
}

TEST_CASE("generate_csl: structure") {
  Graph g82 = generate_csl(8, 2);
  CHECK(g82.is_simple());
  for (int d : g82.degrees()) CHECK(d == 4);
  CHECK(g82.edge_count() == 16);

  Graph g41 = generate_csl(41, 2);
  CHECK(g41.n() == 41);
  CHECK(g41.edge_count() == 82);
  for (int d : g41.degrees()) CHECK(d == 4);

  for (int i = 0; i < 41; ++i)
    for (int j = 0; j < 41; ++j) {
      const int diff = ((i - j) % 41 + 41) % 41;
      const bool expect = diff == 1 || diff == 40 || diff == 2 || diff == 39;
      CHECK(g41.has_edge(i, j) == expect);
    }

  CHECK_THROWS_AS(generate_csl(8, 1), ParameterError);
  CHECK_THROWS_AS(generate_csl(8, 7), ParameterError);
  CHECK_THROWS_AS(generate_csl(4, 2), ParameterError);
}

TEST_CASE("generate_csl: G(n,k) is isomorphic to G(n,n-k) and not to other skips") {
  CHECK_FALSE(are_isomorphic(generate_csl(8, 2), generate_csl(8, 3)));
  CHECK(are_isomorphic(generate_csl(8, 3), generate_csl(8, 5)));
  CHECK(are_isomorphic(generate_csl(9, 2), generate_csl(9, 7)));
  // The explicit map i -> -i.
  std::vector<int> neg(9);
  for (int i = 0; i < 9; ++i) neg[i] = (9 - i) % 9;
  CHECK(apply_permutation(generate_csl(9, 2), Permutation(neg)) == generate_csl(9, 2));
}

TEST_CASE("generate_random_regular: degrees, determinism, errors") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = generate_random_regular(6, 2, seed);
    CHECK(g.is_simple());
    for (int d : g.degrees()) CHECK(d == 2);
  }
  Graph a = generate_random_regular(8, 4, 1);
  for (int d : a.degrees()) CHECK(d == 4);
  CHECK(a == generate_random_regular(8, 4, 1));
  for (int n : {10, 16, 20}) {
    Graph g = generate_random_regular(n, 3, 42);
    for (int d : g.degrees()) CHECK(d == 3);
  }
  CHECK_THROWS_AS(generate_random_regular(5, 3, 0), ParameterError);
  CHECK_THROWS_AS(generate_random_regular(4, 4, 0), ParameterError);
}

TEST_CASE("enumerate_graphs: sizes and ids") {
  CHECK(enumerate_graphs(3).size() == 8);
  CHECK(enumerate_graphs(4).size() == 64);
  auto six = enumerate_graphs(6);
  CHECK(six.size() == 32768);
  CHECK(enumeration_size(7) == (1ull << 21));
  CHECK_THROWS_AS(enumerate_graphs(8), CapacityError);
  std::set<std::uint64_t> ids;
  for (std::size_t i = 0; i < six.size(); i += 97) {
    CHECK(id_of(six[i]).value == i);
    CHECK(graph_from_id(6, GraphId{i}) == six[i]);
    ids.insert(id_of(six[i]).value);
  }
  CHECK(ids.size() == (six.size() + 96) / 97);
}

TEST_CASE("are_isomorphic: known pairs") {
  Graph two_triangles = disjoint_union(cycle_graph(3), cycle_graph(3));
  CHECK_FALSE(are_isomorphic(two_triangles, cycle_graph(6)));
  CHECK(are_isomorphic(cycle_graph(5), cycle_graph(5)));
  CHECK_FALSE(are_isomorphic(path_graph(4), star_graph(3)));
  CHECK_FALSE(are_isomorphic(cycle_graph(4), cycle_graph(5)));
  CHECK_THROWS_AS(are_isomorphic(cycle_graph(11), cycle_graph(11)), CapacityError);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    Graph g = generate_random_regular(10, 3, trial);
    CHECK(are_isomorphic(g, apply_permutation(g, Permutation::random(10, rng))));
  }
}

// Equivalence-relation spot checks against a plain n! search at n = 5.
namespace {
bool brute_iso(const Graph& a, const Graph& b) {
  std::vector<int> p(a.n());
  std::iota(p.begin(), p.end(), 0);
  do {
    if (apply_permutation(a, Permutation(p)) == b) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}
}  // namespace

TEST_CASE("are_isomorphic agrees with n! search and is an equivalence") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> pick(0, enumeration_size(5) - 1);
  for (int trial = 0; trial < 300; ++trial) {
    Graph a = graph_from_id(5, GraphId{pick(rng)});
    Graph b = graph_from_id(5, GraphId{pick(rng)});
    CHECK(are_isomorphic(a, b) == brute_iso(a, b));
    CHECK(are_isomorphic(a, a));
    CHECK(are_isomorphic(a, b) == are_isomorphic(b, a));
  }
  std::uniform_int_distribution<std::uint64_t> pick6(0, enumeration_size(6) - 1);
  int transitive_checks = 0;
  for (int trial = 0; trial < 2000 && transitive_checks < 50; ++trial) {
    Graph a = graph_from_id(6, GraphId{pick6(rng)});
    Graph b = apply_permutation(a, Permutation::random(6, rng));
    Graph c = apply_permutation(b, Permutation::random(6, rng));
    Graph d = graph_from_id(6, GraphId{pick6(rng)});
    CHECK(are_isomorphic(a, c));
    if (are_isomorphic(a, d)) {
      CHECK(are_isomorphic(c, d));
    } else {
      CHECK_FALSE(are_isomorphic(c, d));
    }
    ++transitive_checks;
  }
}

TEST_CASE("serialization round trips") {
  Graph g = generate_csl(11, 3);
  CHECK(graph_from_json(to_json(g)) == g);
  CHECK(graph_from_edge_list(to_edge_list(g)) == g);
  Graph multi(3, 2);
  multi.at(0, 1, 1) = 0.5;
  CHECK(graph_from_json(to_json(multi)) == multi);
  CHECK_THROWS_AS(graph_from_edge_list("3 2\n0 1\n"), IngestionError);
  CHECK_THROWS_AS(graph_from_edge_list("3 1\n0 0\n"), IngestionError);
  CHECK_THROWS(graph_from_json("{\"n\": 2, \"channels\": 1, \"data\": [0, 1]}"));
}
