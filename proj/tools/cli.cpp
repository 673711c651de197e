#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "metamodel/abm.hpp"
#include "metamodel/error.hpp"
#include "metamodel/morphism.hpp"
#include "metamodel/orbit.hpp"
#include "metamodel/polynomial.hpp"
#include "metamodel/serialization.hpp"
#include "metamodel/trace.hpp"
#include "metamodel/typegraph.hpp"

namespace metamodel::cli {

namespace {

using nlohmann::ordered_json;

struct Options {
  std::optional<int> threads;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format;

  std::string trace_path;
  bool call_counts = false;
  std::vector<std::string> assignments;

  std::string src_graph, dst_graph, morphism_path;
  std::vector<std::string> constraints;
  bool preserve_labels = false;

  std::string base_path;
  std::size_t depth = 3;
  std::size_t max_states = 100000;

  std::string spec_path;
  std::size_t steps = 50;
  std::vector<std::string> add_states, add_transitions, remove_states, type_names, notes;
  bool refactor = false;

  std::string train_path, val_path;
  std::vector<unsigned> terms{0, 1, 2, 3, 4, 5};
  std::optional<double> lambda;
  std::size_t folds = 5;
};

// name=value
std::pair<std::string, std::string> split_pair(const std::string& text, const char* what) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidArgument(std::string(what) + " '" + text + "' is not NAME=VALUE");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::map<std::string, std::string> pairs(const std::vector<std::string>& items, const char* what) {
  std::map<std::string, std::string> out;
  for (const auto& s : items) out.insert(split_pair(s, what));
  return out;
}

double parse_probability(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw InvalidArgument("'" + text + "' is not a number");
  return v;
}

// FROM:TO:const:P or FROM:TO:frac:STATE:BETA
TransitionRule parse_transition(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() == 4 && parts[2] == "const") {
    return {parts[0], parts[1], ConstProbability{parse_probability(parts[3])}};
  }
  if (parts.size() == 5 && parts[2] == "frac") {
    return {parts[0], parts[1], FractionProbability{parts[3], parse_probability(parts[4])}};
  }
  throw InvalidArgument("transition '" + text + "' is not FROM:TO:const:P or FROM:TO:frac:STATE:BETA");
}

TypeGraph load_graph(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".jsonl") return build_typegraph(ingest_trace(path));
  return typegraph_from_json(read_json_file(path));
}

AbmSpec load_spec(const std::string& path) { return abm_spec_from_json(read_json_file(path)); }

class Emitter {
 public:
  Emitter(const Options& opts, std::ostream& out) : opts_(opts), out_(out) {}

  void operator()(const std::string& text) const {
    if (opts_.out_path.empty()) {
      out_ << text;
      return;
    }
    std::ofstream file(opts_.out_path, std::ios::binary);
    if (!file) throw IoError("cannot write " + opts_.out_path);
    file << text;
    if (!file) throw IoError("failed writing " + opts_.out_path);
  }

  void json(const ordered_json& j) const { (*this)(j.dump(2) + "\n"); }

 private:
  const Options& opts_;
  std::ostream& out_;
};

// The first allowed format is the default.
std::string pick_format(const Options& o, std::initializer_list<const char*> allowed) {
  if (o.format.empty()) return *allowed.begin();
  for (const char* a : allowed) {
    if (o.format == a) return o.format;
  }
  throw InvalidArgument("unsupported format '" + o.format + "'");
}

int cmd_trace_validate(const Options& o, std::ostream& out) {
  const Trace t = ingest_trace(o.trace_path);
  out << t.records.size() << " records\n";
  return kOk;
}

int cmd_graph_build(const Options& o, const Emitter& emit) {
  const std::string format = pick_format(o, {"dot", "json"});
  const TypeGraph g = build_typegraph(ingest_trace(o.trace_path));
  if (format == "json") {
    emit.json(to_json(g));
  } else {
    emit(to_dot(g, {"G", o.call_counts}));
  }
  return kOk;
}

int cmd_graph_ambiguity(const Options& o, const Emitter& emit, std::ostream& err) {
  const auto reports = detect_ambiguity(build_typegraph(ingest_trace(o.trace_path)));
  ordered_json j = ordered_json::array();
  for (const auto& r : reports) {
    j.push_back(to_json(r));
    err << "ambiguity evidence on " << r.codomain << ": " << r.witnesses.size() << " disjoint pair(s)\n";
  }
  emit.json(j);
  return reports.empty() ? kOk : kAmbiguity;
}

int cmd_graph_split(const Options& o, const Emitter& emit) {
  const std::string format = pick_format(o, {"dot", "json"});
  const TypeGraph g = build_typegraph(ingest_trace(o.trace_path));
  const auto reports = detect_ambiguity(g);
  if (reports.empty()) throw InvalidArgument("no ambiguous type to split");
  const auto explicit_assignment = pairs(o.assignments, "assignment");
  TypeGraph split = g;
  for (const auto& r : reports) {
    std::map<std::string, std::string> assignment = r.suggested_assignment;
    for (auto& [label, name] : assignment) {
      if (auto it = explicit_assignment.find(label); it != explicit_assignment.end()) name = it->second;
    }
    split = split_type(split, r, assignment);
  }
  if (format == "json") {
    emit.json(to_json(split));
  } else {
    emit(to_dot(split));
  }
  return kOk;
}

int cmd_morphism_find(const Options& o, const Emitter& emit, std::ostream& err) {
  const TypeGraph src = load_graph(o.src_graph);
  const TypeGraph dst = load_graph(o.dst_graph);
  const MorphismOptions mopts{o.preserve_labels};
  const auto m = find_homomorphism(src, dst, pairs(o.constraints, "constraint"), mopts);
  if (!m) {
    emit("none\n");
    err << "no homomorphism from " << o.src_graph << " to " << o.dst_graph << '\n';
    return kNoMorphism;
  }
  emit.json(to_json(*m));
  err << format_report(check_morphism(src, dst, *m, mopts));
  return kOk;
}

int cmd_morphism_check(const Options& o, const Emitter& emit) {
  const TypeGraph src = load_graph(o.src_graph);
  const TypeGraph dst = load_graph(o.dst_graph);
  const GraphMorphism m = morphism_from_json(read_json_file(o.morphism_path));
  const FunctorReport r = check_morphism(src, dst, m, {o.preserve_labels});
  if (pick_format(o, {"table", "json"}) == "json") {
    emit.json(to_json(r));
  } else {
    emit(format_report(r));
  }
  return r.is_homomorphism ? kOk : kNoMorphism;
}

FormalPolynomial load_base(const Options& o) {
  return o.base_path.empty() ? FormalPolynomial::one() : polynomial_from_json(read_json_file(o.base_path));
}

int cmd_orbit(const Options& o, const Emitter& emit) {
  const std::string format = pick_format(o, {"dot", "json"});
  OrbitOptions opts;
  opts.max_states = o.max_states;
  opts.threads = o.threads;
  const auto orbit = explore_orbit(load_base(o), polynomial_actions(), o.depth, opts);
  if (format == "json") {
    emit.json(to_json(orbit));
  } else {
    emit(orbit_to_dot(orbit, [](const FormalPolynomial& p) { return p.to_string(); }));
  }
  return kOk;
}

int cmd_model_run(const Options& o, const Emitter& emit) {
  const std::string format = pick_format(o, {"csv", "json"});
  const Trajectory t = run_abm(load_spec(o.spec_path), o.steps, o.seed);
  if (format == "json") {
    ordered_json j;
    j["seed"] = t.seed;
    j["n_agents"] = t.n_agents;
    j["states"] = t.states;
    j["counts"] = t.counts;
    emit.json(j);
  } else {
    std::ostringstream csv;
    write_trajectory_csv(csv, t);
    emit(csv.str());
  }
  return kOk;
}

int cmd_model_describe(const Options& o, const Emitter& emit) {
  emit.json(to_json(describe(run_abm(load_spec(o.spec_path), o.steps, o.seed))));
  return kOk;
}

int cmd_model_augment(const Options& o, const Emitter& emit) {
  AbmSpec spec = load_spec(o.spec_path);
  std::map<std::string, std::string> metadata = pairs(o.notes, "note");
  metadata.emplace("source", std::filesystem::path(o.spec_path).filename().string());
  std::vector<ModelTransform> transforms;
  for (const auto& s : o.add_states) transforms.push_back({AddState{s}, metadata});
  for (const auto& t : o.add_transitions) transforms.push_back({AddTransition{parse_transition(t)}, metadata});
  for (const auto& s : o.remove_states) transforms.push_back({RemoveState{s}, metadata});
  if (o.refactor || !o.type_names.empty()) {
    transforms.push_back({RefactorStates{pairs(o.type_names, "type name")}, metadata});
  }
  if (transforms.empty()) throw InvalidArgument("no transformation requested");
  for (const auto& t : transforms) spec = augment(spec, t);
  emit.json(to_json(spec));
  return kOk;
}

int cmd_model_typegraph(const Options& o, const Emitter& emit) {
  const std::string format = pick_format(o, {"dot", "json"});
  const TypeGraph g = abm_typegraph(load_spec(o.spec_path));
  if (format == "json") {
    emit.json(to_json(g));
  } else {
    emit(to_dot(g));
  }
  return kOk;
}

int cmd_model_select(const Options& o, const Emitter& emit, std::ostream& err) {
  OrbitOptions opts;
  opts.max_states = o.max_states;
  opts.threads = o.threads;
  const auto orbit = explore_orbit(load_base(o), polynomial_actions(), o.depth, opts);
  const ModelSelection sel =
      select_model(orbit, read_dataset_csv(o.train_path), read_dataset_csv(o.val_path), o.threads);
  for (const auto& w : sel.warnings) err << "warning: " << w << '\n';
  emit.json(to_json(sel, orbit));
  return kOk;
}

int cmd_model_lasso(const Options& o, const Emitter& emit) {
  const Dataset data = read_dataset_csv(o.train_path);
  const FormalPolynomial structure(o.terms);
  ordered_json j;
  double lambda = 0.0;
  if (o.lambda) {
    lambda = *o.lambda;
  } else {
    const auto grid = lasso_lambda_grid(structure, data.xs, data.ys);
    const CrossValidation cv = cross_validate_lasso(structure, data, grid, o.folds);
    lambda = cv.best_lambda;
    j["cross_validation"] = to_json(cv);
  }
  j["fit"] = to_json(fit_lasso(structure, data.xs, data.ys, lambda));
  emit.json(j);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Type graphs, morphisms and algebraic model transformations for modeling programs",
               "metamodel"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "Worker threads (default: METAMODEL_THREADS, then all cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("-o,--out", o.out_path, "Write the artifact to FILE instead of stdout");

  std::function<int()> action;
  const Emitter emit(o, out);
  auto bind = [&](CLI::App* cmd, std::function<int()> fn) {
    cmd->callback([&action, fn] { action = fn; });
  };

  auto* trace = app.add_subcommand("trace", "Trace files")->require_subcommand(1);
  auto* validate_cmd = trace->add_subcommand("validate", "Check a JSONL trace against the schema");
  validate_cmd->add_option("trace", o.trace_path, "Trace file")->required();
  bind(validate_cmd, [&] { return cmd_trace_validate(o, out); });

  auto* graph = app.add_subcommand("graph", "Type graphs")->require_subcommand(1);
  auto* build = graph->add_subcommand("build", "Build the type graph of a trace");
  build->add_option("trace", o.trace_path, "Trace file")->required();
  build->add_option("--format", o.format, "dot or json");
  build->add_flag("--counts", o.call_counts, "Show call counts on edges");
  bind(build, [&] { return cmd_graph_build(o, emit); });

  auto* ambiguity = graph->add_subcommand("ambiguity", "Report types used for disjoint value ranges");
  ambiguity->add_option("trace", o.trace_path, "Trace file")->required();
  bind(ambiguity, [&] { return cmd_graph_ambiguity(o, emit, err); });

  auto* split = graph->add_subcommand("split", "Split every ambiguous type into fresh types");
  split->add_option("trace", o.trace_path, "Trace file")->required();
  split->add_option("--assign", o.assignments, "LABEL=TYPE, overriding the suggested name");
  split->add_option("--format", o.format, "dot or json");
  bind(split, [&] { return cmd_graph_split(o, emit); });

  auto* morphism = app.add_subcommand("morphism", "Graph homomorphisms")->require_subcommand(1);
  auto* find = morphism->add_subcommand("find", "Search a homomorphism SRC -> DST");
  find->add_option("src", o.src_graph, "Source graph (.json) or trace (.jsonl)")->required();
  find->add_option("dst", o.dst_graph, "Target graph (.json) or trace (.jsonl)")->required();
  find->add_option("--constrain", o.constraints, "SRC_NODE=DST_NODE");
  find->add_flag("--labels", o.preserve_labels, "Require edge labels to match");
  bind(find, [&] { return cmd_morphism_find(o, emit, err); });

  auto* check = morphism->add_subcommand("check", "Check a morphism and its functor properties");
  check->add_option("src", o.src_graph, "Source graph")->required();
  check->add_option("dst", o.dst_graph, "Target graph")->required();
  check->add_option("morphism", o.morphism_path, "Morphism JSON")->required();
  check->add_flag("--labels", o.preserve_labels, "Require edge labels to match");
  check->add_option("--format", o.format, "table or json");
  bind(check, [&] { return cmd_morphism_check(o, emit); });

  auto* orbit = app.add_subcommand("orbit", "Explore the polynomial orbit under T_x and T_1");
  orbit->add_option("--base", o.base_path, "Base polynomial JSON {\"terms\": [...]} (default 1)");
  orbit->add_option("--depth", o.depth, "Word length bound")->capture_default_str();
  orbit->add_option("--max-states", o.max_states, "State cap")->capture_default_str();
  orbit->add_option("--format", o.format, "dot or json");
  bind(orbit, [&] { return cmd_orbit(o, emit); });

  auto* model = app.add_subcommand("model", "Model runs, transformations and selection")->require_subcommand(1);
  auto* run_cmd = model->add_subcommand("run", "Simulate an agent-based model");
  run_cmd->add_option("--spec", o.spec_path, "Model spec JSON")->required();
  run_cmd->add_option("--steps", o.steps, "Time steps")->capture_default_str();
  run_cmd->add_option("--format", o.format, "csv or json");
  bind(run_cmd, [&] { return cmd_model_run(o, emit); });

  auto* describe_cmd = model->add_subcommand("describe", "Summary statistics of a simulation");
  describe_cmd->add_option("--spec", o.spec_path, "Model spec JSON")->required();
  describe_cmd->add_option("--steps", o.steps, "Time steps")->capture_default_str();
  bind(describe_cmd, [&] { return cmd_model_describe(o, emit); });

  auto* augment_cmd = model->add_subcommand("augment", "Transform a model spec");
  augment_cmd->add_option("--spec", o.spec_path, "Model spec JSON")->required();
  augment_cmd->add_option("--add-state", o.add_states, "New state name");
  augment_cmd->add_option("--add-transition", o.add_transitions, "FROM:TO:const:P or FROM:TO:frac:STATE:BETA");
  augment_cmd->add_option("--remove-state", o.remove_states, "State to remove");
  augment_cmd->add_flag("--refactor", o.refactor, "Move states to singleton types");
  augment_cmd->add_option("--type-name", o.type_names, "STATE=TYPE for --refactor");
  augment_cmd->add_option("--note", o.notes, "KEY=VALUE recorded in provenance");
  bind(augment_cmd, [&] { return cmd_model_augment(o, emit); });

  auto* typegraph_cmd = model->add_subcommand("typegraph", "Type graph of the simulation program");
  typegraph_cmd->add_option("--spec", o.spec_path, "Model spec JSON")->required();
  typegraph_cmd->add_option("--format", o.format, "dot or json");
  bind(typegraph_cmd, [&] { return cmd_model_typegraph(o, emit); });

  auto* select = model->add_subcommand("select", "Pick the orbit polynomial with the lowest validation error");
  select->add_option("--orbit-depth", o.depth, "Orbit depth")->capture_default_str();
  select->add_option("--base", o.base_path, "Base polynomial JSON (default 1)");
  select->add_option("--train", o.train_path, "Training CSV (x,y)")->required();
  select->add_option("--val", o.val_path, "Validation CSV (x,y)")->required();
  select->add_option("--max-states", o.max_states, "State cap")->capture_default_str();
  bind(select, [&] { return cmd_model_select(o, emit, err); });

  auto* lasso = model->add_subcommand("lasso", "LASSO polynomial fit, lambda by cross-validation");
  lasso->add_option("--train", o.train_path, "Training CSV (x,y)")->required();
  lasso->add_option("--terms", o.terms, "Exponents")->delimiter(',')->capture_default_str();
  lasso->add_option("--lambda", o.lambda, "Fixed penalty (skips cross-validation)")->check(CLI::NonNegativeNumber);
  lasso->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
  bind(lasso, [&] { return cmd_model_lasso(o, emit); });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFailure;
  }

  try {
    return action ? action() : kFailure;
  } catch (const DepthExceeded& e) {
    err << "error: DepthExceeded: " << e.what() << '\n';
    return kDepthExceeded;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace metamodel::cli
