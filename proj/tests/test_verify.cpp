#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "ringgnn/graph_ops.hpp"
#include "ringgnn/verify.hpp"

using namespace ringgnn;

TEST_CASE("equivariance and closed-form suites pass on small n") {
  SuiteResult e = verify_equivariance(1, 6, 10, 1);
  CHECK(e.passed);
  CHECK(e.checks == 6 * 10 * 17);
  CHECK(e.max_deviation <= 1e-10);
  SuiteResult b = verify_basis_closed_forms(6, 5, 2);
  CHECK(b.passed);
  CHECK(b.checks == 6 * 5 * 15);
  CHECK_THROWS_AS(verify_equivariance(5, 4, 1, 0), ParameterError);
  // A tolerance nothing can meet reports failure with a reason.
  SuiteResult strict = verify_basis_closed_forms(5, 2, 3, -1.0);
  CHECK_FALSE(strict.passed);
  CHECK(strict.detail.find("fails") != std::string::npos);
}

TEST_CASE("regular_pairs: same degree, same size, not isomorphic") {
  const auto pairs = regular_pairs(24);
  REQUIRE(pairs.size() == 24);
  std::set<int> sizes;
  for (const auto& p : pairs) {
    const int n = p.first.n();
    sizes.insert(n);
    CHECK(n >= 6);
    CHECK(n <= 16);
    CHECK(p.second.n() == n);
    for (int d : p.first.degrees()) CHECK(d == p.degree);
    for (int d : p.second.degrees()) CHECK(d == p.degree);
    if (n <= 8) {
      CHECK(oracle::canonical_form(p.first) != oracle::canonical_form(p.second));
    } else {
      CHECK(oracle::char_poly_values(p.first) != oracle::char_poly_values(p.second));
    }
  }
  CHECK(sizes.size() >= 5);
  CHECK(regular_pairs(24).size() == 24);
}

TEST_CASE("order-2 networks do not separate same-degree regular pairs") {
  SuiteResult r = verify_regular_theorem(20, 30, 0);
  CHECK(r.passed);
  CHECK(r.checks == 20 * 30);
  CHECK(r.max_deviation <= 1e-8);
}
