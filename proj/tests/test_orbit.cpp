#include <doctest.h>

#include <map>
#include <set>

#include "metamodel/error.hpp"
#include "metamodel/orbit.hpp"
#include "metamodel/polynomial.hpp"

using namespace metamodel;

namespace {

// Every image of a word of length <= depth, with the shortest length.
std::map<FormalPolynomial, std::size_t> naive_orbit(const FormalPolynomial& base, std::size_t depth) {
  std::map<FormalPolynomial, std::size_t> seen{{base, 0}};
  std::vector<Word> level{Word{}};
  for (std::size_t len = 1; len <= depth; ++len) {
    std::vector<Word> next;
    for (const auto& w : level) {
      for (std::size_t g = 0; g < 2; ++g) {
        Word v = w;
        v.letters.push_back(g);
        seen.try_emplace(act(v, base), len);
        next.push_back(v);
      }
    }
    level = std::move(next);
  }
  return seen;
}

}  // namespace

TEST_CASE("polynomial structure basics") {
  CHECK(FormalPolynomial({2, 0, 2}).exponents() == std::vector<unsigned>{0, 2});
  CHECK(FormalPolynomial({0, 1, 2}).to_string() == "x^2 + x + 1");
  CHECK(FormalPolynomial({1}).to_string() == "x");
  CHECK(FormalPolynomial().to_string() == "0");
  CHECK(multiply_by_x(FormalPolynomial({0, 2})) == FormalPolynomial({1, 3}));
  CHECK(add_constant_term(FormalPolynomial({1})) == FormalPolynomial({0, 1}));
  CHECK(add_constant_term(FormalPolynomial({0})) == FormalPolynomial({0}));
}

TEST_CASE("depth 3 orbit of 1") {
  auto orbit = explore_orbit(FormalPolynomial::one(), polynomial_actions(), 3);
  std::set<FormalPolynomial> expected{FormalPolynomial({0}),    FormalPolynomial({1}),
                                      FormalPolynomial({0, 1}), FormalPolynomial({2}),
                                      FormalPolynomial({0, 2}), FormalPolynomial({1, 2}),
                                      FormalPolynomial({3})};
  CHECK(std::set<FormalPolynomial>(orbit.states.begin(), orbit.states.end()) == expected);
  CHECK(orbit.states.size() == 7);
  std::set<std::size_t> loops;
  for (const auto& a : orbit.arcs) {
    if (a.from == a.to) {
      CHECK(orbit.generator_names[a.generator] == "T_1");
      loops.insert(a.from);
    }
  }
  CHECK(loops == std::set<std::size_t>{*orbit.find(FormalPolynomial({0})), *orbit.find(FormalPolynomial({0, 1}))});
}

TEST_CASE("orbit matches naive word enumeration") {
  for (const auto& base : {FormalPolynomial::one(), FormalPolynomial({1, 4}), FormalPolynomial()}) {
    for (std::size_t depth = 0; depth <= 6; ++depth) {
      auto orbit = explore_orbit(base, polynomial_actions(), depth);
      auto oracle = naive_orbit(base, depth);
      REQUIRE(orbit.states.size() == oracle.size());
      for (std::size_t i = 0; i < orbit.states.size(); ++i) {
        CHECK(orbit.depth_of[i] == oracle.at(orbit.states[i]));
      }
      CHECK(orbit.states.front() == base);
    }
  }
}

TEST_CASE("parallel orbit equals serial reference for any thread count") {
  const auto actions = polynomial_actions();
  auto ref = reference::explore_orbit(FormalPolynomial::one(), actions, 9);
  for (int threads : {1, 2, 3, 8}) {
    OrbitOptions opts;
    opts.threads = threads;
    CHECK(explore_orbit(FormalPolynomial::one(), actions, 9, opts) == ref);
  }
}

TEST_CASE("depth 0 is the base alone") {
  auto orbit = explore_orbit(FormalPolynomial::one(), polynomial_actions(), 0);
  CHECK(orbit.states.size() == 1);
  CHECK(orbit.arcs.empty());
}

TEST_CASE("state cap") {
  OrbitOptions opts;
  opts.max_states = 5;
  CHECK_THROWS_AS(explore_orbit(FormalPolynomial::one(), polynomial_actions(), 3, opts), DepthExceeded);
  CHECK_THROWS_AS(reference::explore_orbit(FormalPolynomial::one(), polynomial_actions(), 3, 5), DepthExceeded);
  opts.max_states = 7;
  CHECK_NOTHROW(explore_orbit(FormalPolynomial::one(), polynomial_actions(), 3, opts));
}

TEST_CASE("orbit dot") {
  auto orbit = explore_orbit(FormalPolynomial::one(), polynomial_actions(), 1);
  auto dot = orbit_to_dot(orbit, [](const FormalPolynomial& p) { return p.to_string(); });
  CHECK(dot ==
        "digraph orbit {\n  node [shape=box];\n"
        "  s0 [label=\"1\"];\n  s1 [label=\"x\"];\n"
        "  s0 -> s1 [label=\"T_x\"];\n  s0 -> s0 [label=\"T_1\"];\n}\n");
}
