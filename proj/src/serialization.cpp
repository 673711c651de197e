#include "metamodel/serialization.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "metamodel/error.hpp"

namespace metamodel {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw FormatError("expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
  return *it;
}

void only_fields(const json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw FormatError("unknown field '" + key + "'");
    }
  }
}

std::string get_string(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw FormatError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw FormatError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& v, const std::string& what) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw FormatError(what + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<std::string> get_strings(const json& v, const std::string& what) {
  if (!v.is_array()) throw FormatError(what + " must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw FormatError(what + " must contain strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::map<std::string, std::string> get_string_map(const json& v, const std::string& what) {
  if (!v.is_object()) throw FormatError(what + " must be an object");
  std::map<std::string, std::string> out;
  for (const auto& [k, e] : v.items()) {
    if (!e.is_string()) throw FormatError(what + " values must be strings");
    out.emplace(k, e.get<std::string>());
  }
  return out;
}

const char* wire_kind(FingerprintKind k) {
  switch (k) {
    case FingerprintKind::NumericInterval: return "num";
    case FingerprintKind::LengthInterval: return "len";
    case FingerprintKind::HashSample: return "hash";
  }
  return "num";
}

ordered_json prob_to_json(const ProbExpr& p) {
  ordered_json j;
  if (const auto* c = std::get_if<ConstProbability>(&p)) {
    j["kind"] = "const";
    j["value"] = c->value;
  } else {
    const auto& f = std::get<FractionProbability>(p);
    j["kind"] = "fraction";
    j["state"] = f.state;
    j["coefficient"] = f.coefficient;
  }
  return j;
}

ProbExpr prob_from_json(const json& j) {
  const std::string kind = get_string(j, "kind");
  if (kind == "const") {
    only_fields(j, {"kind", "value"});
    return ConstProbability{get_number(j, "value")};
  }
  if (kind == "fraction") {
    only_fields(j, {"kind", "state", "coefficient"});
    return FractionProbability{get_string(j, "state"), get_number(j, "coefficient")};
  }
  throw FormatError("unknown probability kind '" + kind + "'");
}

ordered_json coefficients_json(const FittedPolynomial& fit) {
  ordered_json c = ordered_json::object();
  for (auto it = fit.coefficients.rbegin(); it != fit.coefficients.rend(); ++it) {
    c[std::to_string(it->first)] = it->second;
  }
  return c;
}

}  // namespace

ordered_json to_json(const ValueFingerprint& fp) {
  ordered_json j;
  j["kind"] = wire_kind(fp.kind);
  j["lo"] = fp.lo;
  j["hi"] = fp.hi;
  j["samples"] = fp.samples;
  return j;
}

ValueFingerprint fingerprint_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("fingerprint must be an object");
  only_fields(j, {"kind", "lo", "hi", "samples"});
  const std::string kind = get_string(j, "kind");
  ValueFingerprint fp;
  if (kind == "num") {
    fp.kind = FingerprintKind::NumericInterval;
  } else if (kind == "len") {
    fp.kind = FingerprintKind::LengthInterval;
  } else if (kind == "hash") {
    fp.kind = FingerprintKind::HashSample;
  } else {
    throw FormatError("unknown fingerprint kind '" + kind + "'");
  }
  fp.lo = get_number(j, "lo");
  fp.hi = get_number(j, "hi");
  const json& samples = field(j, "samples");
  if (!samples.is_array()) throw FormatError("'samples' must be an array");
  for (const auto& s : samples) {
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw FormatError("'samples' must contain unsigned 64-bit integers");
    }
    fp.samples.push_back(s.get<std::uint64_t>());
  }
  if (fp.samples.size() > ValueFingerprint::kMaxSamples) {
    throw FormatError("more than " + std::to_string(ValueFingerprint::kMaxSamples) + " samples");
  }
  std::sort(fp.samples.begin(), fp.samples.end());
  fp.samples.erase(std::unique(fp.samples.begin(), fp.samples.end()), fp.samples.end());
  if (fp.is_interval() && !(fp.lo <= fp.hi)) throw FormatError("interval with lo > hi");
  return fp;
}

ordered_json to_json(const TypeGraph& graph) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : graph.nodes()) {
    ordered_json j;
    j["name"] = n.name;
    j["product"] = n.is_product;
    j["factors"] = n.factors;
    nodes.push_back(std::move(j));
  }
  ordered_json edges = ordered_json::array();
  for (EdgeId id = 0; id < graph.edges().size(); ++id) {
    const FnEdge& e = graph.edges()[id];
    ordered_json j;
    j["id"] = id;
    j["label"] = e.label;
    j["src"] = e.src;
    j["dst"] = e.dst;
    j["kind"] = e.kind == EdgeKind::Projection ? "projection" : "function";
    if (e.kind == EdgeKind::Projection) j["index"] = e.projection_index;
    j["calls"] = e.call_count;
    j["fingerprint"] = e.fingerprint ? to_json(*e.fingerprint) : ordered_json(nullptr);
    edges.push_back(std::move(j));
  }
  ordered_json out;
  out["nodes"] = std::move(nodes);
  out["edges"] = std::move(edges);
  return out;
}

TypeGraph typegraph_from_json(const json& j) {
  only_fields(j, {"nodes", "edges"});
  const json& nodes = field(j, "nodes");
  const json& edges = field(j, "edges");
  if (!nodes.is_array() || !edges.is_array()) throw FormatError("'nodes' and 'edges' must be arrays");
  TypeGraphBuilder b;
  for (const auto& n : nodes) {
    only_fields(n, {"name", "product", "factors"});
    const std::string name = get_string(n, "name");
    const bool product = n.contains("product") && n.at("product").is_boolean() && n.at("product").get<bool>();
    if (product) {
      b.add_product(get_strings(field(n, "factors"), "'factors'"), name);
    } else {
      b.add_type(name);
    }
  }
  for (const auto& e : edges) {
    only_fields(e, {"id", "label", "src", "dst", "kind", "index", "calls", "fingerprint"});
    const std::string kind = e.contains("kind") ? get_string(e, "kind") : "function";
    if (kind == "projection") continue;  // regenerated with the product nodes
    if (kind != "function") throw FormatError("unknown edge kind '" + kind + "'");
    std::optional<ValueFingerprint> fp;
    if (e.contains("fingerprint") && !e.at("fingerprint").is_null()) {
      fp = fingerprint_from_json(e.at("fingerprint"));
    }
    const std::size_t calls = e.contains("calls") ? get_count(e.at("calls"), "'calls'") : 1;
    b.add_function(get_string(e, "label"), get_string(e, "src"), get_string(e, "dst"), fp, calls);
  }
  try {
    return b.build();
  } catch (const InvalidGraph& err) {
    throw FormatError(err.what());
  }
}

ordered_json to_json(const GraphMorphism& m) {
  ordered_json nodes = ordered_json::object();
  for (const auto& [a, b] : m.node_map) nodes[a] = b;
  ordered_json edges = ordered_json::object();
  for (const auto& [a, b] : m.edge_map) edges[std::to_string(a)] = b;
  ordered_json out;
  out["nodes"] = std::move(nodes);
  out["edges"] = std::move(edges);
  return out;
}

GraphMorphism morphism_from_json(const json& j) {
  only_fields(j, {"nodes", "edges"});
  GraphMorphism m;
  m.node_map = get_string_map(field(j, "nodes"), "'nodes'");
  const json& edges = field(j, "edges");
  if (!edges.is_object()) throw FormatError("'edges' must be an object");
  for (const auto& [k, v] : edges.items()) {
    EdgeId src = 0;
    auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), src);
    if (ec != std::errc() || ptr != k.data() + k.size()) throw FormatError("edge key '" + k + "' is not an id");
    m.edge_map.emplace(src, get_count(v, "edge image"));
  }
  return m;
}

ordered_json to_json(const FunctorReport& report) {
  ordered_json j;
  j["homomorphism"] = report.is_homomorphism;
  j["full"] = report.is_full;
  j["faithful"] = report.is_faithful;
  j["violations"] = report.violations;
  return j;
}

ordered_json to_json(const AmbiguityReport& report) {
  ordered_json witnesses = ordered_json::array();
  for (const auto& w : report.witnesses) {
    ordered_json j;
    j["f"] = w.f_label;
    j["g"] = w.g_label;
    j["f_evidence"] = to_json(w.f_evidence);
    j["g_evidence"] = to_json(w.g_evidence);
    j["f_calls"] = w.f_calls;
    j["g_calls"] = w.g_calls;
    witnesses.push_back(std::move(j));
  }
  ordered_json out;
  out["codomain"] = report.codomain;
  out["witnesses"] = std::move(witnesses);
  out["clusters"] = report.clusters;
  out["suggested_split"] = report.suggested_split;
  out["suggested_assignment"] = report.suggested_assignment;
  return out;
}

ordered_json to_json(const FormalPolynomial& p) {
  ordered_json j;
  j["terms"] = p.exponents();
  return j;
}

FormalPolynomial polynomial_from_json(const json& j) {
  only_fields(j, {"terms"});
  const json& terms = field(j, "terms");
  if (!terms.is_array()) throw FormatError("'terms' must be an array");
  std::vector<unsigned> exps;
  for (const auto& t : terms) {
    const std::uint64_t e = get_count(t, "exponent");
    if (e > 1000) throw FormatError("exponent " + std::to_string(e) + " is too large");
    exps.push_back(static_cast<unsigned>(e));
  }
  return FormalPolynomial(std::move(exps));
}

ordered_json to_json(const FittedPolynomial& fit) {
  ordered_json j;
  j["structure"] = fit.structure.exponents();
  j["polynomial"] = fit.structure.to_string();
  j["coefficients"] = coefficients_json(fit);
  j["train_loss"] = fit.train_loss;
  j["validation_loss"] = fit.validation_loss ? ordered_json(*fit.validation_loss) : ordered_json(nullptr);
  return j;
}

ordered_json to_json(const LassoFit& fit) {
  ordered_json j = to_json(fit.model);
  j["lambda"] = fit.lambda;
  j["sweeps"] = fit.sweeps;
  j["converged"] = fit.converged;
  return j;
}

ordered_json to_json(const CrossValidation& cv) {
  ordered_json j;
  j["lambdas"] = cv.lambdas;
  j["mean_mse"] = cv.mean_mse;
  j["best_lambda"] = cv.best_lambda;
  return j;
}

ordered_json to_json(const ModelSelection& selection, const OrbitGraph<FormalPolynomial>& orbit) {
  ordered_json candidates = ordered_json::array();
  for (const auto& c : selection.candidates) {
    ordered_json j;
    j["state"] = c.state;
    j["structure"] = orbit.states.at(c.state).exponents();
    j["depth"] = orbit.depth_of.at(c.state);
    if (c.fit) {
      j["validation_mse"] = *c.fit->validation_loss;
    } else {
      j["skipped"] = c.skip_reason;
    }
    candidates.push_back(std::move(j));
  }
  ordered_json out;
  out["structure"] = selection.best.structure.exponents();
  out["state"] = selection.state;
  out["word_length"] = selection.word_length;
  out["model"] = to_json(selection.best);
  out["candidates"] = std::move(candidates);
  out["warnings"] = selection.warnings;
  return out;
}

ordered_json to_json(const OrbitGraph<FormalPolynomial>& orbit) {
  ordered_json states = ordered_json::array();
  for (std::size_t i = 0; i < orbit.states.size(); ++i) {
    ordered_json j;
    j["id"] = i;
    j["terms"] = orbit.states[i].exponents();
    j["polynomial"] = orbit.states[i].to_string();
    j["depth"] = orbit.depth_of[i];
    states.push_back(std::move(j));
  }
  ordered_json arcs = ordered_json::array();
  for (const auto& a : orbit.arcs) {
    ordered_json j;
    j["from"] = a.from;
    j["generator"] = orbit.generator_names.at(a.generator);
    j["to"] = a.to;
    arcs.push_back(std::move(j));
  }
  ordered_json out;
  out["depth"] = orbit.depth;
  out["generators"] = orbit.generator_names;
  out["states"] = std::move(states);
  out["arcs"] = std::move(arcs);
  return out;
}

ordered_json to_json(const AbmSpec& spec) {
  ordered_json transitions = ordered_json::array();
  for (const auto& t : spec.transitions) {
    ordered_json j;
    j["from"] = t.from;
    j["to"] = t.to;
    j["prob"] = prob_to_json(t.prob);
    transitions.push_back(std::move(j));
  }
  ordered_json counts = ordered_json::object();
  for (const auto& s : spec.states) {
    auto it = spec.initial_counts.find(s);
    counts[s] = it == spec.initial_counts.end() ? 0 : it->second;
  }
  ordered_json provenance = ordered_json::array();
  for (const auto& p : spec.provenance) {
    ordered_json j;
    j["transform"] = p.transform;
    j["metadata"] = p.metadata;
    provenance.push_back(std::move(j));
  }
  ordered_json out;
  out["states"] = spec.states;
  out["transitions"] = std::move(transitions);
  out["initial_counts"] = std::move(counts);
  out["representation"] =
      spec.representation == StateRepresentation::SingletonType ? "singleton" : "symbol";
  out["type_names"] = spec.type_names;
  out["provenance"] = std::move(provenance);
  return out;
}

AbmSpec abm_spec_from_json(const json& j) {
  only_fields(j, {"states", "transitions", "initial_counts", "representation", "type_names", "provenance"});
  AbmSpec spec;
  spec.states = get_strings(field(j, "states"), "'states'");
  const json& transitions = field(j, "transitions");
  if (!transitions.is_array()) throw FormatError("'transitions' must be an array");
  for (const auto& t : transitions) {
    only_fields(t, {"from", "to", "prob"});
    spec.transitions.push_back({get_string(t, "from"), get_string(t, "to"), prob_from_json(field(t, "prob"))});
  }
  const json& counts = field(j, "initial_counts");
  if (!counts.is_object()) throw FormatError("'initial_counts' must be an object");
  for (const auto& [k, v] : counts.items()) spec.initial_counts.emplace(k, get_count(v, "initial count"));
  if (j.contains("representation")) {
    const std::string rep = get_string(j, "representation");
    if (rep == "singleton") {
      spec.representation = StateRepresentation::SingletonType;
    } else if (rep != "symbol") {
      throw FormatError("unknown representation '" + rep + "'");
    }
  }
  if (j.contains("type_names")) spec.type_names = get_string_map(j.at("type_names"), "'type_names'");
  if (j.contains("provenance")) {
    const json& prov = j.at("provenance");
    if (!prov.is_array()) throw FormatError("'provenance' must be an array");
    for (const auto& p : prov) {
      only_fields(p, {"transform", "metadata"});
      ProvenanceEntry e;
      e.transform = get_string(p, "transform");
      if (p.contains("metadata")) e.metadata = get_string_map(p.at("metadata"), "'metadata'");
      spec.provenance.push_back(std::move(e));
    }
  }
  return spec;
}

ordered_json to_json(const std::vector<StateSummary>& summary) {
  ordered_json out = ordered_json::array();
  for (const auto& s : summary) {
    ordered_json j;
    j["state"] = s.state;
    j["peak"] = s.peak;
    j["peak_time"] = s.peak_time;
    j["final"] = s.final_count;
    j["mean"] = s.mean;
    out.push_back(std::move(j));
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Dataset read_dataset_csv(std::istream& in) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  auto parse = [&](std::string_view text, double& v) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    return ec == std::errc() && ptr == text.data() + text.size();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "x,y") throw FormatError("dataset header must be 'x,y'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    double x = 0.0, y = 0.0;
    if (comma == std::string::npos || !parse(std::string_view(line).substr(0, comma), x) ||
        !parse(std::string_view(line).substr(comma + 1), y)) {
      throw FormatError("dataset line " + std::to_string(line_no) + " is not 'x,y'");
    }
    data.xs.push_back(x);
    data.ys.push_back(y);
  }
  if (!header) throw FormatError("dataset is empty");
  return data;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const auto old = out.precision(17);
  out << "x,y\n";
  for (std::size_t i = 0; i < data.size(); ++i) out << data.xs[i] << ',' << data.ys[i] << '\n';
  out.precision(old);
}

}  // namespace metamodel
