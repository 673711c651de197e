#include <doctest.h>

#include <random>

#include "metamodel/abm.hpp"
#include "metamodel/error.hpp"
#include "metamodel/morphism.hpp"
#include "support.hpp"

using namespace metamodel;

namespace {

TypeGraph path3() {
  TypeGraphBuilder b;
  b.add_function("a", "u", "v").add_function("b", "v", "w");
  return b.build();
}

TypeGraph cycle3(const std::string& prefix = "") {
  TypeGraphBuilder b;
  b.add_function("x", prefix + "p", prefix + "q")
      .add_function("y", prefix + "q", prefix + "r")
      .add_function("z", prefix + "r", prefix + "p");
  return b.build();
}

TypeGraph parallel_pair() {
  TypeGraphBuilder b;
  b.add_function("f", "A", "B").add_function("g", "A", "B");
  return b.build();
}

EdgeId edge_id(const TypeGraph& g, const std::string& label) {
  for (EdgeId i = 0; i < g.edges().size(); ++i) {
    if (g.edges()[i].label == label) return i;
  }
  FAIL("no edge " << label);
  return 0;
}

}  // namespace

TEST_CASE("identity is fully faithful") {
  for (const auto& g : {path3(), cycle3(), parallel_pair(), testing::multiply_program()}) {
    auto r = check_morphism(g, g, identity_morphism(g));
    CHECK(r.is_homomorphism);
    CHECK(r.is_full);
    CHECK(r.is_faithful);
    CHECK(r.violations.empty());
  }
}

TEST_CASE("collapsing parallel edges is not faithful") {
  auto g = parallel_pair();
  GraphMorphism m = identity_morphism(g);
  m.edge_map[edge_id(g, "g")] = edge_id(g, "f");
  auto r = check_morphism(g, g, m);
  CHECK(r.is_homomorphism);
  CHECK_FALSE(r.is_faithful);
  CHECK_FALSE(r.is_full);
  REQUIRE(r.violations.size() == 2);
  CHECK(r.violations[0].find("faithful") == 0);
  CHECK(r.violations[0].find("f: A -> B") != std::string::npos);
}

TEST_CASE("incidence violations are reported") {
  auto g = path3();
  GraphMorphism m = identity_morphism(g);
  m.node_map["w"] = "u";
  auto r = check_morphism(g, g, m);
  CHECK_FALSE(r.is_homomorphism);
  CHECK_FALSE(r.is_full);
  CHECK_FALSE(r.is_faithful);
  CHECK(r.violations.size() == 1);
}

TEST_CASE("projections keep their index") {
  auto g = testing::multiply_program();
  GraphMorphism m = identity_morphism(g);
  std::swap(m.edge_map[edge_id(g, "π_1")], m.edge_map[edge_id(g, "π_2")]);
  CHECK_FALSE(check_morphism(g, g, m).is_homomorphism);
  m = identity_morphism(g);
  m.edge_map[edge_id(g, "*")] = edge_id(g, "π_1");
  CHECK_FALSE(check_morphism(g, g, m).is_homomorphism);
}

TEST_CASE("labels only matter on request") {
  auto a = cycle3();
  auto b = cycle3("c");
  GraphMorphism m{{{"p", "cq"}, {"q", "cr"}, {"r", "cp"}}, {}};
  m.edge_map = {{edge_id(a, "x"), edge_id(b, "y")}, {edge_id(a, "y"), edge_id(b, "z")}, {edge_id(a, "z"), edge_id(b, "x")}};
  CHECK(check_morphism(a, b, m).is_homomorphism);
  CHECK_FALSE(check_morphism(a, b, m, {true}).is_homomorphism);
}

TEST_CASE("partial maps throw") {
  auto g = path3();
  GraphMorphism m = identity_morphism(g);
  m.node_map.erase("v");
  CHECK_THROWS_AS(check_morphism(g, g, m), UnmappedNode);
  m = identity_morphism(g);
  m.edge_map.erase(0);
  CHECK_THROWS_AS(check_morphism(g, g, m), UnmappedEdge);
  m = identity_morphism(g);
  m.edge_map[0] = 99;
  CHECK_THROWS_AS(check_morphism(g, g, m), UnmappedEdge);
}

TEST_CASE("path into a 3-cycle") {
  auto m = find_homomorphism(path3(), cycle3());
  REQUIRE(m);
  CHECK(check_morphism(path3(), cycle3(), *m).is_homomorphism);
  CHECK(testing::brute_force_homomorphism_exists(path3(), cycle3()));
}

TEST_CASE("cycle into a loopless point") {
  TypeGraphBuilder b;
  b.add_type("o");
  CHECK_FALSE(find_homomorphism(cycle3(), b.build()));
}

TEST_CASE("constraints") {
  auto m = find_homomorphism(path3(), cycle3(), {{"v", "r"}});
  REQUIRE(m);
  CHECK(m->node_map.at("v") == "r");
  CHECK(m->node_map.at("u") == "q");
  CHECK(m->node_map.at("w") == "p");
  CHECK_THROWS_AS(find_homomorphism(path3(), cycle3(), {{"nope", "p"}}), InvalidConstraint);
  CHECK_THROWS_AS(find_homomorphism(path3(), cycle3(), {{"u", "nope"}}), InvalidConstraint);
  CHECK_FALSE(find_homomorphism(cycle3(), cycle3("c"), {{"p", "cp"}, {"q", "cr"}}));
}

TEST_CASE("search agrees with brute force on random small graphs") {
  std::mt19937_64 rng(2024);
  std::size_t found = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto src = testing::random_graph(rng, 5, 8);
    auto dst = testing::random_graph(rng, 5, 8);
    const bool expected = testing::brute_force_homomorphism_exists(src, dst);
    auto m = find_homomorphism(src, dst);
    CHECK(m.has_value() == expected);
    if (m) {
      ++found;
      CHECK(check_morphism(src, dst, *m).is_homomorphism);
    }
  }
  CHECK(found > 30);
  CHECK(found < 270);
}

TEST_CASE("search is deterministic") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto src = testing::random_graph(rng, 5, 8);
    auto dst = testing::random_graph(rng, 5, 8);
    CHECK(find_homomorphism(src, dst) == find_homomorphism(src, dst));
  }
}

TEST_CASE("composition of homomorphisms is a homomorphism") {
  std::mt19937_64 rng(9);
  std::size_t composed = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto a = testing::random_graph(rng, 4, 5);
    auto b = testing::random_graph(rng, 4, 6);
    auto c = testing::random_graph(rng, 4, 8);
    auto ab = find_homomorphism(a, b);
    auto bc = find_homomorphism(b, c);
    if (!ab || !bc) continue;
    ++composed;
    CHECK(check_morphism(a, c, compose(*ab, *bc)).is_homomorphism);
  }
  CHECK(composed > 10);
}

TEST_CASE("division program maps fully faithfully onto multiplication program") {
  auto g = testing::divide_program();
  auto f = testing::multiply_program();
  auto m = find_homomorphism(g, f);
  REQUIRE(m);
  CHECK(m->node_map.at("R⊕Error") == "Z");
  CHECK(m->node_map.at("D") == "Z");
  CHECK(m->node_map.at("Z×Z") == "Z×Z");
  CHECK(f.edges()[m->edge_map.at(edge_id(g, "/"))].label == "*");
  CHECK(f.edges()[m->edge_map.at(edge_id(g, "2×"))].label == "2×");
  auto r = check_morphism(g, f, *m);
  CHECK(r.is_homomorphism);
  CHECK(r.is_full);
  CHECK(r.is_faithful);
}

TEST_CASE("multiplication program has no homomorphism into division program") {
  CHECK_FALSE(find_homomorphism(testing::multiply_program(), testing::divide_program()));
  CHECK_FALSE(testing::brute_force_homomorphism_exists(testing::multiply_program(), testing::divide_program()));
}

TEST_CASE("refactored SIRS maps onto SIRS") {
  auto spec = sirs_spec(0.3, 0.1, 0.05, 90, 10, 0);
  auto refactored = refactor_states(spec);
  auto src = abm_typegraph(refactored.spec);
  auto dst = abm_typegraph(spec);
  CHECK(check_morphism(src, dst, refactored.morphism).is_homomorphism);
  auto m = find_homomorphism(src, dst,
                             {{"Susceptible", "Symbol"}, {"Infected", "Symbol"}, {"Recovered", "Symbol"}});
  REQUIRE(m);
  auto r = check_morphism(src, dst, *m);
  CHECK(r.is_homomorphism);
  CHECK(m->node_map.at("Vector{AgentState}") == "Vector{Symbol}");
}

TEST_CASE("complete_edge_map prefers distinct images") {
  auto g = parallel_pair();
  auto m = complete_edge_map(g, g, {{"A", "A"}, {"B", "B"}});
  REQUIRE(m);
  CHECK(check_morphism(g, g, *m).is_faithful);
  CHECK_FALSE(complete_edge_map(g, g, {{"A", "B"}, {"B", "A"}}));
}

TEST_CASE("report table") {
  FunctorReport r{true, false, true, {"full: #3 f: A -> B is not the image of any edge"}};
  CHECK(format_report(r) ==
        "property      value\n"
        "homomorphism  yes\n"
        "full          no\n"
        "faithful      yes\n"
        "violation     full: #3 f: A -> B is not the image of any edge\n");
}
