#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "metamodel/trace.hpp"

namespace metamodel {

enum class EdgeKind { Function, Projection };

struct TypeNode {
  std::string name;
  bool is_product = false;
  std::vector<std::string> factors;

  friend bool operator==(const TypeNode&, const TypeNode&) = default;
};

struct FnEdge {
  std::string label;
  std::string src;
  std::string dst;
  EdgeKind kind = EdgeKind::Function;
  std::size_t projection_index = 0;  // 1-based, projections only
  std::optional<ValueFingerprint> fingerprint;
  std::size_t call_count = 0;

  friend bool operator==(const FnEdge&, const FnEdge&) = default;
};

/// Index into TypeGraph::edges(). Edges are kept in canonical order
/// (src, dst, label, kind), so ids are stable for a given graph value.
using EdgeId = std::size_t;

/// Name of the tuple type over `factors`, e.g. "(Int,Float)".
std::string product_name(const std::vector<std::string>& factors);

/// Label of the i-th projection (1-based), "π_i".
std::string projection_label(std::size_t index);

/// Category-of-types view of a program: types are nodes, functions are
/// edges. Immutable; construct through TypeGraphBuilder.
class TypeGraph {
 public:
  const std::vector<TypeNode>& nodes() const noexcept { return nodes_; }
  const std::vector<FnEdge>& edges() const noexcept { return edges_; }

  const TypeNode* find_node(std::string_view name) const;
  bool has_node(std::string_view name) const { return find_node(name) != nullptr; }

  std::vector<EdgeId> edges_into(std::string_view node) const;
  std::vector<EdgeId> edges_between(std::string_view src, std::string_view dst) const;
  std::size_t function_edge_count() const;

  friend bool operator==(const TypeGraph& a, const TypeGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  friend class TypeGraphBuilder;
  std::vector<TypeNode> nodes_;
  std::vector<FnEdge> edges_;
  std::map<std::string, std::size_t, std::less<>> node_index_;
};

/// Accumulates nodes and edges. Edges with the same (src, dst, label, kind)
/// are merged: call counts add and fingerprints merge. Product nodes get
/// their projection edges automatically.
class TypeGraphBuilder {
 public:
  TypeGraphBuilder& add_type(const std::string& name);

  /// Adds the product node (and its factor nodes and projections). When
  /// `name` is empty the canonical product_name is used. Returns the name.
  std::string add_product(const std::vector<std::string>& factors, std::string name = {});

  /// Domain node of a function with these argument types: the type itself
  /// for one argument, otherwise a product node.
  std::string add_domain(const std::vector<std::string>& arg_types);

  TypeGraphBuilder& add_function(const std::string& label, const std::string& src,
                                 const std::string& dst,
                                 std::optional<ValueFingerprint> fingerprint = std::nullopt,
                                 std::size_t call_count = 1);

  /// Adds any edge. Projection edges are validated when the graph is built.
  TypeGraphBuilder& add_edge(FnEdge edge);

  /// Throws InvalidGraph on dangling edges or malformed projections.
  TypeGraph build() const;

 private:
  using EdgeKey = std::tuple<std::string, std::string, std::string, EdgeKind>;

  std::map<std::string, TypeNode> nodes_;
  std::map<EdgeKey, FnEdge> edges_;
  std::set<EdgeKey> conflicted_;
};

TypeGraph build_typegraph(const Trace& trace);

struct AmbiguityWitness {
  EdgeId f = 0;
  EdgeId g = 0;
  std::string f_label;
  std::string g_label;
  ValueFingerprint f_evidence;
  ValueFingerprint g_evidence;
  std::size_t f_calls = 0;
  std::size_t g_calls = 0;
};

/// Evidence that one codomain type is used for semantically different
/// values. `clusters` groups the inbound edge labels by overlapping evidence;
/// `suggested_split` has one fresh type name per cluster.
struct AmbiguityReport {
  std::string codomain;
  std::vector<AmbiguityWitness> witnesses;
  std::vector<std::vector<std::string>> clusters;
  std::vector<std::string> suggested_split;
  std::map<std::string, std::string> suggested_assignment;
};

std::vector<AmbiguityReport> detect_ambiguity(const TypeGraph& graph);

/// Replaces `report.codomain` by fresh types. Inbound function edges are
/// retargeted by label through `assignment`; every other edge touching the
/// old type (including through product nodes) is duplicated onto each fresh
/// type. Throws IncompleteAssignment or NameCollision.
TypeGraph split_type(const TypeGraph& graph, const AmbiguityReport& report,
                     const std::map<std::string, std::string>& assignment);

struct DotOptions {
  std::string graph_name = "G";
  bool show_call_counts = false;
};

/// Deterministic Graphviz rendering; projection edges are dotted.
std::string to_dot(const TypeGraph& graph, const DotOptions& options = {});

}  // namespace metamodel
