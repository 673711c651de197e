#include "metamodel/abm.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "metamodel/error.hpp"
#include "metamodel/rng.hpp"

namespace metamodel {

namespace {

constexpr const char* kSymbolType = "Symbol";
constexpr const char* kSymbolVector = "Vector{Symbol}";
constexpr const char* kStateVector = "Vector{AgentState}";

const std::set<std::string>& program_types() {
  static const std::set<std::string> types{"AgentModel", "Int", "Float", "Vector{Float}",
                                           "Dict{Symbol,Int}", kSymbolType, kSymbolVector,
                                           kStateVector};
  return types;
}

std::optional<std::size_t> state_index(const AbmSpec& spec, const std::string& name) {
  auto it = std::find(spec.states.begin(), spec.states.end(), name);
  if (it == spec.states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - spec.states.begin());
}

std::size_t require_state(const AbmSpec& spec, const std::string& name, const char* role) {
  auto idx = state_index(spec, name);
  if (!idx) throw UnknownState(std::string(role) + " references unknown state '" + name + "'");
  return *idx;
}

// Largest value the expression can take over all population distributions.
double upper_bound(const ProbExpr& p) {
  return std::visit(
      [](const auto& e) {
        if constexpr (std::is_same_v<std::decay_t<decltype(e)>, ConstProbability>) {
          return e.value;
        } else {
          return e.coefficient;
        }
      },
      p);
}

std::string default_type_name(const std::string& state) {
  static const std::map<std::string, std::string> names{
      {"S", "Susceptible"}, {"I", "Infected"}, {"R", "Recovered"}, {"D", "Dead"}, {"E", "Exposed"}};
  auto it = names.find(state);
  return it == names.end() ? state : it->second;
}

void check_type_names(const AbmSpec& spec) {
  std::set<std::string> seen;
  for (const auto& s : spec.states) {
    auto it = spec.type_names.find(s);
    if (it == spec.type_names.end()) throw InvalidSpec("state " + s + " has no singleton type name");
    if (it->second.empty()) throw InvalidSpec("state " + s + " has an empty type name");
    if (program_types().count(it->second)) {
      throw InvalidSpec("type name " + it->second + " collides with a program type");
    }
    if (!seen.insert(it->second).second) throw InvalidSpec("type name " + it->second + " is used twice");
  }
}

std::string format_prob(const ProbExpr& p) {
  std::ostringstream out;
  std::visit(
      [&](const auto& e) {
        if constexpr (std::is_same_v<std::decay_t<decltype(e)>, ConstProbability>) {
          out << "const " << e.value;
        } else {
          out << "frac " << e.state << " " << e.coefficient;
        }
      },
      p);
  return out.str();
}

struct CompiledRule {
  std::size_t to;
  bool is_fraction;
  double value;             // constant probability or coefficient
  std::size_t frac_state;   // fraction rules only
};

}  // namespace

AbmSpec sirs_spec(double beta, double rho, double mu, std::uint64_t susceptible,
                  std::uint64_t infected, std::uint64_t recovered) {
  AbmSpec spec;
  spec.states = {"S", "I", "R"};
  spec.transitions = {{"S", "I", FractionProbability{"I", beta}},
                      {"I", "R", ConstProbability{rho}},
                      {"R", "S", ConstProbability{mu}}};
  spec.initial_counts = {{"S", susceptible}, {"I", infected}, {"R", recovered}};
  return spec;
}

ModelSignature signature(const AbmSpec& spec) {
  ModelSignature sig;
  sig.domain = {"t"};
  sig.codomain = spec.states;
  sig.description = "agent counts per state over time";
  return sig;
}

void validate(const AbmSpec& spec) {
  std::set<std::string> names;
  for (const auto& s : spec.states) {
    if (s.empty()) throw InvalidSpec("empty state name");
    if (!names.insert(s).second) throw InvalidSpec("duplicate state " + s);
  }
  for (const auto& [s, _] : spec.initial_counts) require_state(spec, s, "initial_counts");
  std::vector<double> outgoing(spec.states.size(), 0.0);
  for (const auto& rule : spec.transitions) {
    const std::size_t from = require_state(spec, rule.from, "transition");
    require_state(spec, rule.to, "transition");
    if (rule.from == rule.to) throw InvalidSpec("self transition on " + rule.from);
    if (const auto* f = std::get_if<FractionProbability>(&rule.prob)) {
      require_state(spec, f->state, "transition probability");
    }
    const double bound = upper_bound(rule.prob);
    if (!std::isfinite(bound) || bound < 0.0 || bound > 1.0) {
      throw InvalidSpec("transition " + rule.from + "->" + rule.to + " has probability outside [0,1]");
    }
    outgoing[from] += bound;
  }
  for (std::size_t s = 0; s < spec.states.size(); ++s) {
    if (outgoing[s] > 1.0 + 1e-12) {
      throw InvalidSpec("outgoing probabilities of " + spec.states[s] + " can sum to " +
                        std::to_string(outgoing[s]) + " > 1");
    }
  }
  if (spec.representation == StateRepresentation::SingletonType) check_type_names(spec);
}

std::size_t draws_per_agent(const AbmSpec& spec) {
  std::map<std::string, std::size_t> out_degree;
  std::size_t k = 0;
  for (const auto& rule : spec.transitions) k = std::max(k, ++out_degree[rule.from]);
  return k;
}

Trajectory run_abm(const AbmSpec& spec, std::size_t n_steps, std::uint64_t seed) {
  validate(spec);
  const std::size_t n_states = spec.states.size();
  std::vector<std::vector<CompiledRule>> rules(n_states);
  for (const auto& rule : spec.transitions) {
    CompiledRule c{*state_index(spec, rule.to), false, 0.0, 0};
    if (const auto* f = std::get_if<FractionProbability>(&rule.prob)) {
      c.is_fraction = true;
      c.value = f->coefficient;
      c.frac_state = *state_index(spec, f->state);
    } else {
      c.value = std::get<ConstProbability>(rule.prob).value;
    }
    rules[*state_index(spec, rule.from)].push_back(c);
  }

  Trajectory traj;
  traj.states = spec.states;
  traj.seed = seed;
  std::vector<std::uint32_t> agents;
  std::vector<std::uint64_t> counts(n_states, 0);
  for (std::size_t s = 0; s < n_states; ++s) {
    auto it = spec.initial_counts.find(spec.states[s]);
    const std::uint64_t c = it == spec.initial_counts.end() ? 0 : it->second;
    agents.insert(agents.end(), c, static_cast<std::uint32_t>(s));
    counts[s] = c;
  }
  traj.n_agents = agents.size();
  traj.counts.reserve(n_steps + 1);
  traj.counts.push_back(counts);

  const CounterRng rng(seed);
  const double population = static_cast<double>(agents.size());
  std::vector<std::vector<double>> prob(n_states);
  for (std::size_t step = 1; step <= n_steps; ++step) {
    for (std::size_t s = 0; s < n_states; ++s) {
      prob[s].clear();
      for (const auto& r : rules[s]) {
        const double fraction =
            population > 0 ? static_cast<double>(counts[r.frac_state]) / population : 0.0;
        prob[s].push_back(r.is_fraction ? r.value * fraction : r.value);
      }
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const std::uint32_t s = agents[i];
      for (std::size_t j = 0; j < rules[s].size(); ++j) {
        if (rng.uniform(step, i, j) < prob[s][j]) {
          agents[i] = static_cast<std::uint32_t>(rules[s][j].to);
          break;
        }
      }
    }
    std::fill(counts.begin(), counts.end(), 0);
    for (std::uint32_t s : agents) ++counts[s];
    traj.counts.push_back(counts);
  }
  return traj;
}

std::vector<Trajectory> run_abm_batch(std::span<const AbmRun> runs, std::optional<int> threads) {
  for (const auto& r : runs) {
    if (!r.spec) throw InvalidArgument("batch run without a spec");
    validate(*r.spec);
  }
  const int nthreads = resolve_threads(threads);
  const auto n = static_cast<long long>(runs.size());
  std::vector<Trajectory> out(runs.size());
  std::exception_ptr failure;
#pragma omp parallel for num_threads(nthreads) schedule(dynamic)
  for (long long k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      out[i] = run_abm(*runs[i].spec, runs[i].n_steps, runs[i].seed);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace reference {

std::vector<Trajectory> run_abm_batch(std::span<const AbmRun> runs) {
  std::vector<Trajectory> out;
  out.reserve(runs.size());
  for (const auto& r : runs) {
    if (!r.spec) throw InvalidArgument("batch run without a spec");
    out.push_back(run_abm(*r.spec, r.n_steps, r.seed));
  }
  return out;
}

}  // namespace reference

// ---------------------------------------------------------------------------

std::string describe_transform(const ModelTransform& t) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, AddState>) {
          return "AddState(" + k.name + ")";
        } else if constexpr (std::is_same_v<K, AddTransition>) {
          return "AddTransition(" + k.rule.from + "->" + k.rule.to + ", " + format_prob(k.rule.prob) + ")";
        } else if constexpr (std::is_same_v<K, RemoveState>) {
          return "RemoveState(" + k.name + ")";
        } else {
          return "RefactorStates";
        }
      },
      t.kind);
}

AbmSpec augment(const AbmSpec& spec, const ModelTransform& t) {
  validate(spec);
  AbmSpec out = spec;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, AddState>) {
          if (k.name.empty()) throw InvalidSpec("empty state name");
          if (state_index(out, k.name)) throw InvalidSpec("state " + k.name + " already exists");
          out.states.push_back(k.name);
          out.initial_counts[k.name] = 0;
          if (out.representation == StateRepresentation::SingletonType) {
            out.type_names[k.name] = default_type_name(k.name);
          }
        } else if constexpr (std::is_same_v<K, AddTransition>) {
          require_state(out, k.rule.from, "transition");
          require_state(out, k.rule.to, "transition");
          if (const auto* f = std::get_if<FractionProbability>(&k.rule.prob)) {
            require_state(out, f->state, "transition probability");
          }
          out.transitions.push_back(k.rule);
        } else if constexpr (std::is_same_v<K, RemoveState>) {
          require_state(out, k.name, "RemoveState");
          for (const auto& rule : out.transitions) {
            const auto* f = std::get_if<FractionProbability>(&rule.prob);
            if (rule.from == k.name || rule.to == k.name || (f && f->state == k.name)) {
              throw StateInUse("state " + k.name + " is used by transition " + rule.from + "->" + rule.to);
            }
          }
          if (auto it = out.initial_counts.find(k.name); it != out.initial_counts.end() && it->second > 0) {
            throw StateInUse("state " + k.name + " has " + std::to_string(it->second) + " initial agents");
          }
          out.states.erase(std::find(out.states.begin(), out.states.end(), k.name));
          out.initial_counts.erase(k.name);
          out.type_names.erase(k.name);
        } else {
          out = refactor_states(out, k.type_names).spec;
        }
      },
      t.kind);
  validate(out);
  out.provenance.push_back({describe_transform(t), t.metadata});
  return out;
}

RefactorResult refactor_states(const AbmSpec& spec,
                               const std::map<std::string, std::string>& type_names) {
  if (spec.representation == StateRepresentation::SingletonType) {
    throw AlreadyRefactored("states are already singleton types");
  }
  validate(spec);
  for (const auto& [s, _] : type_names) require_state(spec, s, "type name map");
  RefactorResult result;
  result.spec = spec;
  result.spec.representation = StateRepresentation::SingletonType;
  result.spec.type_names.clear();
  for (const auto& s : spec.states) {
    auto it = type_names.find(s);
    result.spec.type_names[s] = it != type_names.end() ? it->second : default_type_name(s);
  }
  validate(result.spec);

  const TypeGraph refactored = abm_typegraph(result.spec);
  const TypeGraph original = abm_typegraph(spec);
  std::map<std::string, std::string> to_symbol;
  for (const auto& [_, type] : result.spec.type_names) to_symbol.emplace(type, kSymbolType);
  to_symbol.emplace(kStateVector, kSymbolVector);

  std::map<std::string, std::string> node_map;
  for (const auto& node : refactored.nodes()) {
    auto translate = [&](const std::string& name) {
      auto it = to_symbol.find(name);
      return it == to_symbol.end() ? name : it->second;
    };
    if (node.is_product) {
      std::vector<std::string> factors;
      for (const auto& f : node.factors) factors.push_back(translate(f));
      node_map.emplace(node.name, product_name(factors));
    } else {
      node_map.emplace(node.name, translate(node.name));
    }
  }
  auto morphism = complete_edge_map(refactored, original, node_map);
  if (!morphism) throw Error("internal: refactored type graph does not map onto the original");
  result.morphism = std::move(*morphism);
  return result;
}

TypeGraph abm_typegraph(const AbmSpec& spec) {
  const bool singleton = spec.representation == StateRepresentation::SingletonType;
  auto state_type = [&](const std::string& s) {
    return singleton ? spec.type_names.at(s) : std::string(kSymbolType);
  };
  const std::string agents = singleton ? kStateVector : kSymbolVector;

  TypeGraphBuilder b;
  b.add_function("step!", b.add_domain({"AgentModel", "Int"}), "AgentModel");
  b.add_function(".agents", "AgentModel", agents);
  b.add_function(".params", "AgentModel", "Vector{Float}");
  b.add_function("getindex", b.add_domain({"Vector{Float}", "Int"}), "Float");
  b.add_function("length", agents, "Int");
  b.add_function("/", b.add_domain({"Int", "Int"}), "Float");
  b.add_function("rand", "AgentModel", "Float");
  b.add_function("describe", "AgentModel", "Dict{Symbol,Int}");

  // Population distribution: read and write agent states, count per state.
  for (const auto& s : spec.states) {
    const std::string t = state_type(s);
    b.add_function("getindex", b.add_domain({agents, "Int"}), t);
    b.add_function("setindex!", b.add_domain({agents, t, "Int"}), agents);
    b.add_function("count", b.add_domain({agents, t}), "Int");
  }

  std::size_t anonymous = 0;
  for (const auto& s : spec.states) {
    std::vector<const TransitionRule*> outgoing;
    for (const auto& r : spec.transitions) {
      if (r.from == s) outgoing.push_back(&r);
    }
    if (outgoing.empty()) continue;
    const std::string domain = b.add_domain({state_type(s), "Float"});
    if (!singleton) {
      b.add_function("#" + std::to_string(++anonymous), domain, kSymbolType);
      continue;
    }
    b.add_function("transition", domain, state_type(s));
    for (const auto* r : outgoing) b.add_function("transition", domain, state_type(r->to));
  }
  return b.build();
}

std::vector<StateSummary> describe(const Trajectory& trajectory) {
  std::vector<StateSummary> out;
  for (std::size_t s = 0; s < trajectory.states.size(); ++s) {
    StateSummary sum;
    sum.state = trajectory.states[s];
    double total = 0.0;
    for (std::size_t t = 0; t < trajectory.counts.size(); ++t) {
      const std::uint64_t c = trajectory.counts[t][s];
      if (t == 0 || c > sum.peak) {
        sum.peak = c;
        sum.peak_time = t;
      }
      total += static_cast<double>(c);
    }
    if (!trajectory.counts.empty()) {
      sum.final_count = trajectory.counts.back()[s];
      sum.mean = total / static_cast<double>(trajectory.counts.size());
    }
    out.push_back(sum);
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "step";
  for (const auto& s : trajectory.states) out << ',' << s;
  out << '\n';
  for (std::size_t t = 0; t < trajectory.counts.size(); ++t) {
    out << t;
    for (std::uint64_t c : trajectory.counts[t]) out << ',' << c;
    out << '\n';
  }
}

}  // namespace metamodel
