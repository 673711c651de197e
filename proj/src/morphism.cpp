#include "metamodel/morphism.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>
#include <utility>

#include "metamodel/error.hpp"

namespace metamodel {

namespace {

bool compatible(const FnEdge& s, const FnEdge& d, const MorphismOptions& options) {
  if (s.kind != d.kind) return false;
  if (s.kind == EdgeKind::Projection && s.projection_index != d.projection_index) return false;
  if (options.preserve_labels && s.label != d.label) return false;
  return true;
}

std::string describe_edge(const TypeGraph& g, EdgeId id) {
  const FnEdge& e = g.edges()[id];
  return "#" + std::to_string(id) + " " + e.label + ": " + e.src + " -> " + e.dst;
}

std::vector<std::size_t> degrees(const TypeGraph& g, const std::map<std::string, std::size_t>& index) {
  std::vector<std::size_t> deg(g.nodes().size(), 0);
  for (const auto& e : g.edges()) {
    ++deg[index.at(e.src)];
    ++deg[index.at(e.dst)];
  }
  return deg;
}

std::map<std::string, std::size_t> index_nodes(const TypeGraph& g) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.nodes().size(); ++i) index.emplace(g.nodes()[i].name, i);
  return index;
}

class HomomorphismSearch {
 public:
  HomomorphismSearch(const TypeGraph& src, const TypeGraph& dst, const MorphismOptions& options)
      : src_(src), dst_(dst), options_(options) {
    src_index_ = index_nodes(src);
    dst_index_ = index_nodes(dst);
    src_degree_ = degrees(src, src_index_);
    dst_degree_ = degrees(dst, dst_index_);
    incident_.resize(src.nodes().size());
    for (EdgeId id = 0; id < src.edges().size(); ++id) {
      const FnEdge& e = src.edges()[id];
      const std::size_t u = src_index_.at(e.src);
      const std::size_t v = src_index_.at(e.dst);
      incident_[u].push_back({id, v, true});
      if (u != v) incident_[v].push_back({id, u, false});
    }
    for (EdgeId id = 0; id < dst.edges().size(); ++id) {
      const FnEdge& e = dst.edges()[id];
      dst_between_[{dst_index_.at(e.src), dst_index_.at(e.dst)}].push_back(id);
    }
    assignment_.assign(src.nodes().size(), kUnassigned);
  }

  std::optional<std::map<std::string, std::string>> run(
      const std::map<std::string, std::string>& constraints) {
    for (const auto& [s, d] : constraints) {
      auto si = src_index_.find(s);
      auto di = dst_index_.find(d);
      if (si == src_index_.end()) throw InvalidConstraint("unknown source node " + s);
      if (di == dst_index_.end()) throw InvalidConstraint("unknown target node " + d);
      assignment_[si->second] = di->second;
    }
    for (const auto& [s, _] : constraints) {
      if (!consistent(src_index_.at(s), assignment_[src_index_.at(s)])) return std::nullopt;
    }

    // Unconstrained nodes by descending degree, ties by name.
    for (std::size_t u = 0; u < src_.nodes().size(); ++u) {
      if (assignment_[u] == kUnassigned) order_.push_back(u);
    }
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return src_degree_[a] > src_degree_[b];
    });
    if (!extend(0)) return std::nullopt;

    std::map<std::string, std::string> node_map;
    for (std::size_t u = 0; u < assignment_.size(); ++u) {
      node_map.emplace(src_.nodes()[u].name, dst_.nodes()[assignment_[u]].name);
    }
    return node_map;
  }

 private:
  static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

  struct Incidence {
    EdgeId edge;
    std::size_t other;
    bool outgoing;
  };

  bool has_image(const FnEdge& e, std::size_t a, std::size_t b) const {
    auto it = dst_between_.find({a, b});
    if (it == dst_between_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](EdgeId d) {
      return compatible(e, dst_.edges()[d], options_);
    });
  }

  // Every edge between u and an assigned node has at least one compatible
  // image when u is sent to c.
  bool consistent(std::size_t u, std::size_t c) const {
    for (const auto& inc : incident_[u]) {
      std::size_t other;
      if (inc.other == u) {
        other = c;
      } else if (assignment_[inc.other] == kUnassigned) {
        continue;
      } else {
        other = assignment_[inc.other];
      }
      const FnEdge& e = src_.edges()[inc.edge];
      const bool ok = inc.outgoing ? has_image(e, c, other) : has_image(e, other, c);
      if (!ok) return false;
    }
    return true;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size()) return true;
    const std::size_t u = order_[depth];
    std::vector<std::size_t> candidates(dst_.nodes().size());
    for (std::size_t c = 0; c < candidates.size(); ++c) candidates[c] = c;
    const auto gap = [&](std::size_t c) {
      const auto a = static_cast<long long>(dst_degree_[c]);
      const auto b = static_cast<long long>(src_degree_[u]);
      return std::llabs(a - b);
    };
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return gap(a) < gap(b); });
    for (std::size_t c : candidates) {
      if (!consistent(u, c)) continue;
      assignment_[u] = c;
      if (extend(depth + 1)) return true;
      assignment_[u] = kUnassigned;
    }
    return false;
  }

  const TypeGraph& src_;
  const TypeGraph& dst_;
  MorphismOptions options_;
  std::map<std::string, std::size_t> src_index_;
  std::map<std::string, std::size_t> dst_index_;
  std::vector<std::size_t> src_degree_;
  std::vector<std::size_t> dst_degree_;
  std::vector<std::vector<Incidence>> incident_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<EdgeId>> dst_between_;
  std::vector<std::size_t> assignment_;
  std::vector<std::size_t> order_;
};

}  // namespace

std::optional<GraphMorphism> complete_edge_map(const TypeGraph& src, const TypeGraph& dst,
                                               const std::map<std::string, std::string>& node_map,
                                               const MorphismOptions& options) {
  GraphMorphism m;
  m.node_map = node_map;
  std::map<std::pair<std::string, std::string>, std::set<EdgeId>> used;
  for (EdgeId id = 0; id < src.edges().size(); ++id) {
    const FnEdge& e = src.edges()[id];
    auto a = node_map.find(e.src);
    auto b = node_map.find(e.dst);
    if (a == node_map.end() || b == node_map.end()) return std::nullopt;
    auto& taken = used[{e.src, e.dst}];
    std::optional<EdgeId> best;
    auto rank = [&](EdgeId d) {
      return std::pair{taken.count(d) ? 1 : 0, dst.edges()[d].label == e.label ? 0 : 1};
    };
    for (EdgeId d : dst.edges_between(a->second, b->second)) {
      if (!compatible(e, dst.edges()[d], options)) continue;
      if (!best || rank(d) < rank(*best)) best = d;
    }
    if (!best) return std::nullopt;
    taken.insert(*best);
    m.edge_map.emplace(id, *best);
  }
  return m;
}

std::optional<GraphMorphism> find_homomorphism(const TypeGraph& src, const TypeGraph& dst,
                                               const std::map<std::string, std::string>& constraints,
                                               const MorphismOptions& options) {
  HomomorphismSearch search(src, dst, options);
  auto node_map = search.run(constraints);
  if (!node_map) return std::nullopt;
  return complete_edge_map(src, dst, *node_map, options);
}

FunctorReport check_morphism(const TypeGraph& src, const TypeGraph& dst, const GraphMorphism& m,
                             const MorphismOptions& options) {
  for (const auto& node : src.nodes()) {
    auto it = m.node_map.find(node.name);
    if (it == m.node_map.end()) throw UnmappedNode("source node " + node.name + " is not mapped");
    if (!dst.has_node(it->second)) {
      throw UnmappedNode("source node " + node.name + " maps to unknown node " + it->second);
    }
  }
  for (const auto& [s, _] : m.node_map) {
    if (!src.has_node(s)) throw UnmappedNode("node map mentions unknown source node " + s);
  }
  for (EdgeId id = 0; id < src.edges().size(); ++id) {
    auto it = m.edge_map.find(id);
    if (it == m.edge_map.end()) throw UnmappedEdge("source edge " + describe_edge(src, id) + " is not mapped");
    if (it->second >= dst.edges().size()) {
      throw UnmappedEdge("source edge " + describe_edge(src, id) + " maps to unknown edge #" +
                         std::to_string(it->second));
    }
  }
  for (const auto& [s, _] : m.edge_map) {
    if (s >= src.edges().size()) throw UnmappedEdge("edge map mentions unknown source edge #" + std::to_string(s));
  }

  FunctorReport report;
  report.is_homomorphism = true;
  bool incidence_reported = false;
  bool kind_reported = false;
  bool label_reported = false;
  for (EdgeId id = 0; id < src.edges().size(); ++id) {
    const FnEdge& e = src.edges()[id];
    const EdgeId d = m.edge_map.at(id);
    const FnEdge& t = dst.edges()[d];
    if (t.src != m.node_map.at(e.src) || t.dst != m.node_map.at(e.dst)) {
      report.is_homomorphism = false;
      if (!incidence_reported) {
        report.violations.push_back("incidence: " + describe_edge(src, id) + " maps to " +
                                    describe_edge(dst, d) + " but endpoints map to " +
                                    m.node_map.at(e.src) + " -> " + m.node_map.at(e.dst));
        incidence_reported = true;
      }
    }
    if (e.kind != t.kind || (e.kind == EdgeKind::Projection && e.projection_index != t.projection_index)) {
      report.is_homomorphism = false;
      if (!kind_reported) {
        report.violations.push_back("kind: " + describe_edge(src, id) + " maps to " +
                                    describe_edge(dst, d));
        kind_reported = true;
      }
    }
    if (options.preserve_labels && e.label != t.label) {
      report.is_homomorphism = false;
      if (!label_reported) {
        report.violations.push_back("label: " + describe_edge(src, id) + " maps to " +
                                    describe_edge(dst, d));
        label_reported = true;
      }
    }
  }
  if (!report.is_homomorphism) return report;

  report.is_faithful = true;
  std::map<std::pair<std::string, std::string>, std::map<EdgeId, EdgeId>> hom_images;
  for (EdgeId id = 0; id < src.edges().size(); ++id) {
    const FnEdge& e = src.edges()[id];
    auto& images = hom_images[{e.src, e.dst}];
    const EdgeId d = m.edge_map.at(id);
    auto [it, inserted] = images.emplace(d, id);
    if (!inserted && report.is_faithful) {
      report.is_faithful = false;
      report.violations.push_back("faithful: " + describe_edge(src, it->second) + " and " +
                                  describe_edge(src, id) + " both map to " + describe_edge(dst, d));
    }
  }

  report.is_full = true;
  std::set<std::string> image_nodes;
  for (const auto& [_, t] : m.node_map) image_nodes.insert(t);
  std::set<EdgeId> image_edges;
  for (const auto& [_, d] : m.edge_map) image_edges.insert(d);
  for (EdgeId d = 0; d < dst.edges().size(); ++d) {
    const FnEdge& t = dst.edges()[d];
    if (!image_nodes.count(t.src) || !image_nodes.count(t.dst)) continue;
    if (!image_edges.count(d)) {
      report.is_full = false;
      report.violations.push_back("full: " + describe_edge(dst, d) + " is not the image of any edge");
      break;
    }
  }
  return report;
}

GraphMorphism identity_morphism(const TypeGraph& graph) {
  GraphMorphism m;
  for (const auto& n : graph.nodes()) m.node_map.emplace(n.name, n.name);
  for (EdgeId id = 0; id < graph.edges().size(); ++id) m.edge_map.emplace(id, id);
  return m;
}

GraphMorphism compose(const GraphMorphism& first, const GraphMorphism& second) {
  GraphMorphism out;
  for (const auto& [s, mid] : first.node_map) {
    auto it = second.node_map.find(mid);
    if (it == second.node_map.end()) throw UnmappedNode("composition: node " + mid + " is not mapped");
    out.node_map.emplace(s, it->second);
  }
  for (const auto& [s, mid] : first.edge_map) {
    auto it = second.edge_map.find(mid);
    if (it == second.edge_map.end()) {
      throw UnmappedEdge("composition: edge #" + std::to_string(mid) + " is not mapped");
    }
    out.edge_map.emplace(s, it->second);
  }
  return out;
}

std::string format_report(const FunctorReport& report) {
  auto yes_no = [](bool b) { return b ? "yes" : "no"; };
  std::ostringstream out;
  out << "property      value\n";
  out << "homomorphism  " << yes_no(report.is_homomorphism) << '\n';
  out << "full          " << (report.is_homomorphism ? yes_no(report.is_full) : "n/a") << '\n';
  out << "faithful      " << (report.is_homomorphism ? yes_no(report.is_faithful) : "n/a") << '\n';
  for (const auto& v : report.violations) out << "violation     " << v << '\n';
  return out.str();
}

}  // namespace metamodel
