#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "metamodel/error.hpp"
#include "metamodel/parallel.hpp"

namespace metamodel {

/// A named, pure transformation of model states.
template <class State>
struct Action {
  std::string name;
  std::function<State(const State&)> apply;
};

/// Cayley-style graph of the states reachable from `base`. States are in
/// BFS discovery order (base first); `depth_of[i]` is the length of the
/// shortest generator word reaching state i. Arcs, including self-loops,
/// are recorded for every state expanded (depth_of < depth).
template <class State>
struct OrbitGraph {
  struct Arc {
    std::size_t from;
    std::size_t generator;
    std::size_t to;
    friend bool operator==(const Arc&, const Arc&) = default;
  };

  std::vector<State> states;
  std::vector<std::size_t> depth_of;
  std::vector<Arc> arcs;
  std::vector<std::string> generator_names;
  std::size_t base = 0;
  std::size_t depth = 0;

  std::optional<std::size_t> find(const State& s) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i] == s) return i;
    }
    return std::nullopt;
  }

  friend bool operator==(const OrbitGraph&, const OrbitGraph&) = default;
};

struct OrbitOptions {
  std::size_t max_states = 100000;
  std::optional<int> threads;
};

namespace detail {

template <class State>
class OrbitAccumulator {
 public:
  OrbitAccumulator(const State& base, std::span<const Action<State>> generators,
                   std::size_t depth, std::size_t max_states)
      : max_states_(max_states) {
    graph_.depth = depth;
    for (const auto& g : generators) graph_.generator_names.push_back(g.name);
    intern(base, 0);
  }

  // Returns the index of `s`, adding it when new.
  std::size_t intern(const State& s, std::size_t depth) {
    auto [it, inserted] = index_.try_emplace(s, graph_.states.size());
    if (inserted) {
      if (graph_.states.size() >= max_states_) {
        throw DepthExceeded("orbit exceeds " + std::to_string(max_states_) + " states");
      }
      graph_.states.push_back(s);
      graph_.depth_of.push_back(depth);
    }
    return it->second;
  }

  void add_arc(std::size_t from, std::size_t generator, std::size_t to) {
    graph_.arcs.push_back({from, generator, to});
  }

  OrbitGraph<State>& graph() { return graph_; }

 private:
  OrbitGraph<State> graph_;
  std::map<State, std::size_t> index_;
  std::size_t max_states_;
};

}  // namespace detail

/// Level-synchronous BFS. Each frontier is expanded in parallel (every
/// state/generator pair is independent); results are merged in
/// (state, generator) order, so the graph matches the serial reference for
/// any thread count. Throws DepthExceeded past `options.max_states`.
template <class State>
OrbitGraph<State> explore_orbit(const State& base, std::span<const Action<State>> generators,
                                std::size_t depth, const OrbitOptions& options = {}) {
  detail::OrbitAccumulator<State> acc(base, generators, depth, options.max_states);
  const int threads = resolve_threads(options.threads);
  const std::size_t g = generators.size();
  std::vector<std::size_t> frontier{0};
  for (std::size_t level = 0; level < depth && !frontier.empty(); ++level) {
    const std::vector<State>& states = acc.graph().states;
    const auto n = static_cast<long long>(frontier.size() * g);
    std::vector<State> images(static_cast<std::size_t>(n));
#pragma omp parallel for num_threads(threads) schedule(static)
    for (long long i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      images[k] = generators[k % g].apply(states[frontier[k / g]]);
    }
    const std::size_t known = acc.graph().states.size();
    for (std::size_t k = 0; k < images.size(); ++k) {
      acc.add_arc(frontier[k / g], k % g, acc.intern(images[k], level + 1));
    }
    frontier.clear();
    for (std::size_t s = known; s < acc.graph().states.size(); ++s) frontier.push_back(s);
  }
  return std::move(acc.graph());
}

template <class State>
OrbitGraph<State> explore_orbit(const State& base, const std::vector<Action<State>>& generators,
                                std::size_t depth, const OrbitOptions& options = {}) {
  return explore_orbit(base, std::span<const Action<State>>(generators), depth, options);
}

namespace reference {

/// Queue-driven BFS, one state at a time. Kept as the oracle for the
/// parallel kernel.
template <class State>
OrbitGraph<State> explore_orbit(const State& base, std::span<const Action<State>> generators,
                                std::size_t depth, std::size_t max_states = 100000) {
  metamodel::detail::OrbitAccumulator<State> acc(base, generators, depth, max_states);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    const std::size_t d = acc.graph().depth_of[s];
    if (d >= depth) continue;
    for (std::size_t gi = 0; gi < generators.size(); ++gi) {
      const State image = generators[gi].apply(acc.graph().states[s]);
      const std::size_t before = acc.graph().states.size();
      const std::size_t to = acc.intern(image, d + 1);
      acc.add_arc(s, gi, to);
      if (to >= before) queue.push_back(to);
    }
  }
  return std::move(acc.graph());
}

template <class State>
OrbitGraph<State> explore_orbit(const State& base, const std::vector<Action<State>>& generators,
                                std::size_t depth, std::size_t max_states = 100000) {
  return explore_orbit(base, std::span<const Action<State>>(generators), depth, max_states);
}

}  // namespace reference

/// Graphviz rendering: states as boxes labelled by `label(state)`, arcs
/// labelled by generator name.
template <class State, class Label>
std::string orbit_to_dot(const OrbitGraph<State>& orbit, Label label) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream out;
  out << "digraph orbit {\n  node [shape=box];\n";
  for (std::size_t i = 0; i < orbit.states.size(); ++i) {
    out << "  s" << i << " [label=" << quote(label(orbit.states[i])) << "];\n";
  }
  for (const auto& arc : orbit.arcs) {
    out << "  s" << arc.from << " -> s" << arc.to
        << " [label=" << quote(orbit.generator_names[arc.generator]) << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace metamodel
