#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "metamodel/abm.hpp"
#include "metamodel/morphism.hpp"
#include "metamodel/orbit.hpp"
#include "metamodel/polynomial.hpp"
#include "metamodel/trace.hpp"
#include "metamodel/typegraph.hpp"

namespace metamodel {

// Writers emit keys in a fixed order so output is byte-stable. Readers
// throw FormatError on any schema violation.

/// {"kind": "num"|"len"|"hash", "lo", "hi", "samples"}
nlohmann::ordered_json to_json(const ValueFingerprint& fp);
ValueFingerprint fingerprint_from_json(const nlohmann::json& j);

/// {"nodes": [{name, product, factors}], "edges": [{id, label, src, dst,
/// kind, index, calls, fingerprint}]}
nlohmann::ordered_json to_json(const TypeGraph& graph);
TypeGraph typegraph_from_json(const nlohmann::json& j);

/// {"nodes": {src: dst}, "edges": {"<src id>": dst id}}
nlohmann::ordered_json to_json(const GraphMorphism& m);
GraphMorphism morphism_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const FunctorReport& report);
nlohmann::ordered_json to_json(const AmbiguityReport& report);

/// {"terms": [exponents...]}
nlohmann::ordered_json to_json(const FormalPolynomial& p);
FormalPolynomial polynomial_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const FittedPolynomial& fit);
nlohmann::ordered_json to_json(const LassoFit& fit);
nlohmann::ordered_json to_json(const CrossValidation& cv);
nlohmann::ordered_json to_json(const ModelSelection& selection,
                               const OrbitGraph<FormalPolynomial>& orbit);
nlohmann::ordered_json to_json(const OrbitGraph<FormalPolynomial>& orbit);

nlohmann::ordered_json to_json(const AbmSpec& spec);
AbmSpec abm_spec_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const std::vector<StateSummary>& summary);

/// Parses a whole file. Throws IoError or FormatError.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Two-column CSV with header "x,y".
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace metamodel
