#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "metamodel/abm.hpp"
#include "metamodel/polynomial.hpp"
#include "metamodel/typegraph.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(METAMODEL_TEST_DATA) / name;
}

// f(a,b) = 2(a*b): Z×Z -*-> Z, projections onto Z, 2× loop on Z.
inline metamodel::TypeGraph multiply_program() {
  metamodel::TypeGraphBuilder b;
  const auto zz = b.add_product({"Z", "Z"}, "Z×Z");
  b.add_function("*", zz, "Z");
  b.add_function("2×", "Z", "Z");
  return b.build();
}

// g(a,b) = 2(a/b): Z×Z -/-> R⊕Error, projections onto D, 2× loop on R⊕Error.
inline metamodel::TypeGraph divide_program() {
  metamodel::TypeGraphBuilder b;
  const auto zz = b.add_product({"D", "D"}, "Z×Z");
  b.add_function("/", zz, "R⊕Error");
  b.add_function("2×", "R⊕Error", "R⊕Error");
  return b.build();
}

// Function edges only, nodes "n0".."n{k-1}", labels "e0"... Self-loops and
// parallel edges allowed.
inline metamodel::TypeGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes,
                                         std::size_t max_edges) {
  std::uniform_int_distribution<std::size_t> nodes_dist(1, max_nodes);
  std::uniform_int_distribution<std::size_t> edges_dist(0, max_edges);
  const std::size_t n = nodes_dist(rng);
  const std::size_t m = edges_dist(rng);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  metamodel::TypeGraphBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.add_type("n" + std::to_string(i));
  for (std::size_t e = 0; e < m; ++e) {
    b.add_function("e" + std::to_string(e), "n" + std::to_string(pick(rng)), "n" + std::to_string(pick(rng)));
  }
  return b.build();
}

// Exhaustive search over every node map; an edge map exists iff each source
// edge has some target edge between the images (labels ignored).
inline bool brute_force_homomorphism_exists(const metamodel::TypeGraph& src,
                                            const metamodel::TypeGraph& dst) {
  const auto& sn = src.nodes();
  const auto& dn = dst.nodes();
  if (sn.empty()) return true;
  if (dn.empty()) return false;
  std::vector<std::size_t> choice(sn.size(), 0);
  std::map<std::string, std::size_t> src_index;
  for (std::size_t i = 0; i < sn.size(); ++i) src_index[sn[i].name] = i;
  while (true) {
    bool ok = true;
    for (const auto& e : src.edges()) {
      const std::string& u = dn[choice[src_index[e.src]]].name;
      const std::string& v = dn[choice[src_index[e.dst]]].name;
      bool found = false;
      for (const auto& f : dst.edges()) {
        if (f.src == u && f.dst == v && f.kind == e.kind &&
            (e.kind == metamodel::EdgeKind::Function || f.projection_index == e.projection_index)) {
          found = true;
          break;
        }
      }
      if (!found) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
    std::size_t k = 0;
    while (k < choice.size() && ++choice[k] == dn.size()) choice[k++] = 0;
    if (k == choice.size()) return false;
  }
}

inline metamodel::AbmSpec random_sirs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> count(0, 60);
  return metamodel::sirs_spec(prob(rng), prob(rng), prob(rng), count(rng), count(rng), count(rng));
}

inline metamodel::AbmSpec sird_from(const metamodel::AbmSpec& sirs, double delta) {
  using namespace metamodel;
  AbmSpec s = augment(sirs, {AddState{"D"}, {}});
  return augment(s, {AddTransition{{"I", "D", ConstProbability{delta}}}, {}});
}

// y = f(x) + N(0, sigma) on x ~ U[lo, hi].
template <class F>
metamodel::Dataset sample_dataset(std::mt19937_64& rng, std::size_t n, double lo, double hi, double sigma,
                                  F f) {
  std::uniform_real_distribution<double> xs(lo, hi);
  std::normal_distribution<double> noise(0.0, sigma);
  metamodel::Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xs(rng);
    d.xs.push_back(x);
    d.ys.push_back(f(x) + (sigma > 0 ? noise(rng) : 0.0));
  }
  return d;
}

}  // namespace testing
