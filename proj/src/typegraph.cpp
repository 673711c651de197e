#include "metamodel/typegraph.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <numeric>
#include <sstream>

#include "metamodel/error.hpp"

namespace metamodel {

std::string product_name(const std::vector<std::string>& factors) {
  std::string out = "(";
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) out += ',';
    out += factors[i];
  }
  out += ')';
  return out;
}

std::string projection_label(std::size_t index) { return "π_" + std::to_string(index); }

const TypeNode* TypeGraph::find_node(std::string_view name) const {
  auto it = node_index_.find(name);
  return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

std::vector<EdgeId> TypeGraph::edges_into(std::string_view node) const {
  std::vector<EdgeId> out;
  for (EdgeId i = 0; i < edges_.size(); ++i) {
    if (edges_[i].dst == node) out.push_back(i);
  }
  return out;
}

std::vector<EdgeId> TypeGraph::edges_between(std::string_view src, std::string_view dst) const {
  std::vector<EdgeId> out;
  for (EdgeId i = 0; i < edges_.size(); ++i) {
    if (edges_[i].src == src && edges_[i].dst == dst) out.push_back(i);
  }
  return out;
}

std::size_t TypeGraph::function_edge_count() const {
  return static_cast<std::size_t>(std::count_if(
      edges_.begin(), edges_.end(), [](const FnEdge& e) { return e.kind == EdgeKind::Function; }));
}

// ---------------------------------------------------------------------------

TypeGraphBuilder& TypeGraphBuilder::add_type(const std::string& name) {
  nodes_.try_emplace(name, TypeNode{name, false, {}});
  return *this;
}

std::string TypeGraphBuilder::add_product(const std::vector<std::string>& factors,
                                          std::string name) {
  if (name.empty()) name = product_name(factors);
  for (const auto& f : factors) add_type(f);
  auto [it, inserted] = nodes_.try_emplace(name, TypeNode{name, true, factors});
  if (!inserted && !it->second.is_product) {
    // A plain node seen earlier under the same name becomes the product.
    it->second.is_product = true;
    it->second.factors = factors;
  } else if (!inserted && it->second.factors != factors) {
    throw InvalidGraph("product node " + name + " redeclared with different factors");
  }
  for (std::size_t i = 0; i < factors.size(); ++i) {
    FnEdge proj;
    proj.label = projection_label(i + 1);
    proj.src = name;
    proj.dst = factors[i];
    proj.kind = EdgeKind::Projection;
    proj.projection_index = i + 1;
    add_edge(std::move(proj));
  }
  return name;
}

std::string TypeGraphBuilder::add_domain(const std::vector<std::string>& arg_types) {
  if (arg_types.size() == 1) {
    add_type(arg_types.front());
    return arg_types.front();
  }
  return add_product(arg_types);
}

TypeGraphBuilder& TypeGraphBuilder::add_function(const std::string& label, const std::string& src,
                                                 const std::string& dst,
                                                 std::optional<ValueFingerprint> fingerprint,
                                                 std::size_t call_count) {
  FnEdge e;
  e.label = label;
  e.src = src;
  e.dst = dst;
  e.kind = EdgeKind::Function;
  e.fingerprint = std::move(fingerprint);
  e.call_count = call_count;
  return add_edge(std::move(e));
}

TypeGraphBuilder& TypeGraphBuilder::add_edge(FnEdge edge) {
  add_type(edge.src);
  add_type(edge.dst);
  EdgeKey key{edge.src, edge.dst, edge.label, edge.kind};
  auto it = edges_.find(key);
  if (it == edges_.end()) {
    edges_.emplace(std::move(key), std::move(edge));
    return *this;
  }
  FnEdge& existing = it->second;
  existing.call_count += edge.call_count;
  if (conflicted_.count(key)) return *this;
  if (!existing.fingerprint) {
    existing.fingerprint = std::move(edge.fingerprint);
  } else if (edge.fingerprint) {
    if (existing.fingerprint->kind != edge.fingerprint->kind) {
      // Conflicting evidence counts as none.
      existing.fingerprint.reset();
      conflicted_.insert(key);
    } else {
      existing.fingerprint = merge_fingerprints(*existing.fingerprint, *edge.fingerprint);
    }
  }
  return *this;
}

TypeGraph TypeGraphBuilder::build() const {
  TypeGraph g;
  for (const auto& [name, node] : nodes_) {
    g.node_index_.emplace(name, g.nodes_.size());
    g.nodes_.push_back(node);
  }
  for (const auto& [key, edge] : edges_) {
    const TypeNode* src = g.find_node(edge.src);
    if (!src || !g.find_node(edge.dst)) {
      throw InvalidGraph("edge " + edge.label + " references an unknown node");
    }
    if (edge.kind == EdgeKind::Projection) {
      const std::size_t i = edge.projection_index;
      if (!src->is_product || i < 1 || i > src->factors.size() ||
          src->factors[i - 1] != edge.dst || edge.label != projection_label(i)) {
        throw InvalidGraph("malformed projection " + edge.label + " from " + edge.src);
      }
    }
    g.edges_.push_back(edge);
  }
  // Every product must carry exactly one projection per factor.
  for (const auto& node : g.nodes_) {
    if (!node.is_product) continue;
    std::size_t count = 0;
    for (const auto& e : g.edges_) {
      if (e.kind == EdgeKind::Projection && e.src == node.name) ++count;
    }
    if (count != node.factors.size()) {
      throw InvalidGraph("product " + node.name + " has " + std::to_string(count) +
                         " projections for " + std::to_string(node.factors.size()) + " factors");
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

TypeGraph build_typegraph(const Trace& trace) {
  TypeGraphBuilder builder;
  for (const auto& rec : trace.records) {
    const std::string src = builder.add_domain(rec.arg_types);
    builder.add_type(rec.return_type);
    builder.add_function(rec.function_name, src, rec.return_type, rec.return_fingerprint, 1);
  }
  return builder.build();
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// ".param" -> "Param", "Main.initial" -> "Initial".
std::string type_name_from_label(const std::string& label) {
  std::string base = label;
  if (auto dot = base.find_last_of('.'); dot != std::string::npos && dot + 1 < base.size()) {
    base = base.substr(dot + 1);
  }
  std::string out;
  bool upper = true;
  for (unsigned char c : base) {
    if (std::isalnum(c)) {
      out += upper ? static_cast<char>(std::toupper(c)) : static_cast<char>(c);
      upper = false;
    } else {
      upper = true;
    }
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out = "T" + out;
  return out;
}

}  // namespace

std::vector<AmbiguityReport> detect_ambiguity(const TypeGraph& graph) {
  std::vector<AmbiguityReport> reports;
  const auto& edges = graph.edges();
  for (const auto& node : graph.nodes()) {
    std::vector<EdgeId> inbound;
    for (EdgeId id : graph.edges_into(node.name)) {
      if (edges[id].kind == EdgeKind::Function) inbound.push_back(id);
    }
    if (inbound.size() < 2) continue;

    AmbiguityReport report;
    report.codomain = node.name;
    DisjointSets sets(inbound.size());
    for (std::size_t i = 0; i < inbound.size(); ++i) {
      const FnEdge& f = edges[inbound[i]];
      for (std::size_t j = i + 1; j < inbound.size(); ++j) {
        const FnEdge& g = edges[inbound[j]];
        if (!f.fingerprint || !g.fingerprint || f.fingerprint->kind != g.fingerprint->kind) continue;
        if (fingerprints_disjoint(*f.fingerprint, *g.fingerprint)) {
          report.witnesses.push_back({inbound[i], inbound[j], f.label, g.label, *f.fingerprint,
                                      *g.fingerprint, f.call_count, g.call_count});
        } else {
          sets.unite(i, j);
        }
      }
    }
    if (report.witnesses.empty()) continue;

    // Clusters among edges that carry evidence, ordered by first member.
    std::map<std::size_t, std::vector<std::string>> by_root;
    std::vector<std::string> unclustered;
    for (std::size_t i = 0; i < inbound.size(); ++i) {
      const FnEdge& e = edges[inbound[i]];
      if (!e.fingerprint) {
        unclustered.push_back(e.label);
        continue;
      }
      auto& members = by_root[sets.find(i)];
      if (std::find(members.begin(), members.end(), e.label) == members.end()) {
        members.push_back(e.label);
      }
    }
    std::set<std::string> taken;
    for (const auto& n : graph.nodes()) taken.insert(n.name);
    for (auto& [root, members] : by_root) {
      std::string name = type_name_from_label(members.front());
      std::string candidate = name;
      for (int suffix = 2; taken.count(candidate); ++suffix) {
        candidate = name + std::to_string(suffix);
      }
      taken.insert(candidate);
      for (const auto& label : members) report.suggested_assignment.emplace(label, candidate);
      report.clusters.push_back(members);
      report.suggested_split.push_back(candidate);
    }
    for (const auto& label : unclustered) {
      report.suggested_assignment.emplace(label, report.suggested_split.front());
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

TypeGraph split_type(const TypeGraph& graph, const AmbiguityReport& report,
                     const std::map<std::string, std::string>& assignment) {
  const std::string& target = report.codomain;
  if (!graph.has_node(target)) {
    throw IncompleteAssignment("codomain " + target + " is not a node of the graph");
  }
  std::set<std::string> inbound_labels;
  for (EdgeId id : graph.edges_into(target)) {
    const FnEdge& e = graph.edges()[id];
    if (e.kind != EdgeKind::Function) continue;
    inbound_labels.insert(e.label);
    if (!assignment.count(e.label)) {
      throw IncompleteAssignment("no fresh type assigned to edge " + e.label + " into " + target);
    }
  }
  std::set<std::string> fresh;
  for (const auto& [label, name] : assignment) {
    if (!inbound_labels.count(label)) {
      throw IncompleteAssignment("edge " + label + " does not enter " + target);
    }
    if (graph.has_node(name)) throw NameCollision("type " + name + " already exists");
    fresh.insert(name);
  }
  if (fresh.empty()) throw IncompleteAssignment("assignment is empty");

  // Names each node expands into after the split.
  std::map<std::string, std::vector<std::string>> memo;
  std::function<const std::vector<std::string>&(const std::string&)> variants;
  auto factor_combos = [&](const TypeNode& node) {
    std::vector<std::vector<std::string>> combos{{}};
    for (const auto& f : node.factors) {
      std::vector<std::vector<std::string>> next;
      for (const auto& prefix : combos) {
        for (const auto& v : variants(f)) {
          auto c = prefix;
          c.push_back(v);
          next.push_back(std::move(c));
        }
      }
      combos = std::move(next);
    }
    return combos;
  };
  variants = [&](const std::string& name) -> const std::vector<std::string>& {
    if (auto it = memo.find(name); it != memo.end()) return it->second;
    std::vector<std::string> out;
    const TypeNode* node = graph.find_node(name);
    if (name == target) {
      out.assign(fresh.begin(), fresh.end());
    } else if (node && node->is_product) {
      const auto combos = factor_combos(*node);
      if (combos.size() == 1 && combos.front() == node->factors) {
        out.push_back(name);
      } else {
        for (const auto& c : combos) out.push_back(product_name(c));
      }
    } else {
      out.push_back(name);
    }
    return memo.emplace(name, std::move(out)).first->second;
  };

  TypeGraphBuilder builder;
  for (const auto& node : graph.nodes()) {
    if (node.name == target) {
      for (const auto& f : fresh) builder.add_type(f);
    } else if (node.is_product) {
      const auto& names = variants(node.name);
      if (names.size() == 1 && names.front() == node.name) {
        builder.add_product(node.factors, node.name);
      } else {
        for (const auto& c : factor_combos(node)) builder.add_product(c);
      }
    } else {
      builder.add_type(node.name);
    }
  }
  for (const auto& e : graph.edges()) {
    if (e.kind == EdgeKind::Projection) continue;  // regenerated with the products
    const auto& srcs = variants(e.src);
    if (e.dst == target) {
      for (const auto& s : srcs) {
        builder.add_function(e.label, s, assignment.at(e.label), e.fingerprint, e.call_count);
      }
      continue;
    }
    for (const auto& s : srcs) {
      for (const auto& d : variants(e.dst)) {
        builder.add_function(e.label, s, d, e.fingerprint, e.call_count);
      }
    }
  }
  return builder.build();
}

namespace {

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_dot(const TypeGraph& graph, const DotOptions& options) {
  std::ostringstream out;
  out << "digraph " << options.graph_name << " {\n";
  for (const auto& node : graph.nodes()) {
    out << "  " << dot_quote(node.name)
        << (node.is_product ? " [shape=box, style=rounded];\n" : " [shape=box];\n");
  }
  for (const auto& e : graph.edges()) {
    std::string label = e.label;
    if (options.show_call_counts && e.kind == EdgeKind::Function) {
      label += " (" + std::to_string(e.call_count) + ")";
    }
    out << "  " << dot_quote(e.src) << " -> " << dot_quote(e.dst) << " [label=" << dot_quote(label);
    if (e.kind == EdgeKind::Projection) out << ", style=dotted";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace metamodel
