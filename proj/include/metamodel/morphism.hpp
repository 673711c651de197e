#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metamodel/typegraph.hpp"

namespace metamodel {

/// Node and edge map between two type graphs. Edge ids index the
/// respective graphs' canonical edge lists.
struct GraphMorphism {
  std::map<std::string, std::string> node_map;
  std::map<EdgeId, EdgeId> edge_map;

  friend bool operator==(const GraphMorphism&, const GraphMorphism&) = default;
};

struct FunctorReport {
  bool is_homomorphism = false;
  bool is_full = false;
  bool is_faithful = false;
  std::vector<std::string> violations;
};

struct MorphismOptions {
  /// Require edge labels to match. Off by default: refactorings rename
  /// functions, so only incidence and projection kind are structural.
  bool preserve_labels = false;
};

/// Checks incidence, kind and (optionally) label preservation, then
/// fullness and faithfulness. Faithful: injective on every source hom-set.
/// Full: every target edge between two image nodes is hit. Both are false
/// when the map is not a homomorphism. Throws UnmappedNode / UnmappedEdge
/// when the maps are not total on `src` or point outside `dst`.
FunctorReport check_morphism(const TypeGraph& src, const TypeGraph& dst, const GraphMorphism& m,
                             const MorphismOptions& options = {});

/// Backtracking search for a homomorphism extending `constraints`.
/// Throws InvalidConstraint when a constraint names an unknown node.
std::optional<GraphMorphism> find_homomorphism(
    const TypeGraph& src, const TypeGraph& dst,
    const std::map<std::string, std::string>& constraints = {},
    const MorphismOptions& options = {});

/// Picks an edge map for a total node map, or nullopt when some source edge
/// has no compatible image. Parallel edges prefer distinct images.
std::optional<GraphMorphism> complete_edge_map(const TypeGraph& src, const TypeGraph& dst,
                                               const std::map<std::string, std::string>& node_map,
                                               const MorphismOptions& options = {});

GraphMorphism identity_morphism(const TypeGraph& graph);

/// `second` after `first`.
GraphMorphism compose(const GraphMorphism& first, const GraphMorphism& second);

/// Plain-text table of a report, one property per row.
std::string format_report(const FunctorReport& report);

}  // namespace metamodel
