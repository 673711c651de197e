#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "metamodel/morphism.hpp"
#include "metamodel/parallel.hpp"
#include "metamodel/typegraph.hpp"

namespace metamodel {

/// Names of a model's independent and dependent variables.
struct ModelSignature {
  std::vector<std::string> domain;
  std::vector<std::string> codomain;
  std::string description;
};

struct ConstProbability {
  double value = 0.0;
  friend bool operator==(const ConstProbability&, const ConstProbability&) = default;
};

/// coefficient * (agents in `state`) / (all agents), measured at the start
/// of the step.
struct FractionProbability {
  std::string state;
  double coefficient = 0.0;
  friend bool operator==(const FractionProbability&, const FractionProbability&) = default;
};

using ProbExpr = std::variant<ConstProbability, FractionProbability>;

struct TransitionRule {
  std::string from;
  std::string to;
  ProbExpr prob;
  friend bool operator==(const TransitionRule&, const TransitionRule&) = default;
};

enum class StateRepresentation { Symbol, SingletonType };

struct ProvenanceEntry {
  std::string transform;
  std::map<std::string, std::string> metadata;
  friend bool operator==(const ProvenanceEntry&, const ProvenanceEntry&) = default;
};

/// An agent-based compartment model. Each agent holds one state; every step
/// it may follow one of its state's outgoing transitions.
struct AbmSpec {
  std::vector<std::string> states;
  std::vector<TransitionRule> transitions;
  std::map<std::string, std::uint64_t> initial_counts;
  StateRepresentation representation = StateRepresentation::Symbol;
  /// Singleton type per state; only used with SingletonType.
  std::map<std::string, std::string> type_names;
  std::vector<ProvenanceEntry> provenance;

  friend bool operator==(const AbmSpec&, const AbmSpec&) = default;
};

/// S -> I (beta * fraction infected), I -> R (rho), R -> S (mu).
AbmSpec sirs_spec(double beta, double rho, double mu, std::uint64_t susceptible,
                  std::uint64_t infected, std::uint64_t recovered);

ModelSignature signature(const AbmSpec& spec);

/// Throws UnknownState for dangling references and InvalidSpec when a
/// probability can leave [0, 1] or a state's outgoing mass can exceed 1.
void validate(const AbmSpec& spec);

/// Largest number of outgoing transitions of any state: the number of
/// uniform slots every agent owns per step.
std::size_t draws_per_agent(const AbmSpec& spec);

struct Trajectory {
  std::vector<std::string> states;
  std::vector<std::vector<std::uint64_t>> counts;  // counts[t][state], t = 0..n_steps
  std::uint64_t seed = 0;
  std::uint64_t n_agents = 0;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Synchronous stochastic simulation. Agents start in state-list order. In
/// step t every agent i owns draws_per_agent(spec) uniforms
/// u(seed, t, i, slot); it takes the first rule j of its state (declaration
/// order) with u(seed, t, i, j) < p_j. Probabilities are evaluated against
/// the distribution at the start of the step. Row 0 is the initial state.
Trajectory run_abm(const AbmSpec& spec, std::size_t n_steps, std::uint64_t seed);

struct AbmRun {
  const AbmSpec* spec = nullptr;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
};

/// Independent simulations in parallel; output order matches `runs`.
std::vector<Trajectory> run_abm_batch(std::span<const AbmRun> runs,
                                      std::optional<int> threads = std::nullopt);

namespace reference {
std::vector<Trajectory> run_abm_batch(std::span<const AbmRun> runs);
}  // namespace reference

struct AddState {
  std::string name;
};
struct AddTransition {
  TransitionRule rule;
};
struct RemoveState {
  std::string name;
};
struct RefactorStates {
  std::map<std::string, std::string> type_names;
};

struct ModelTransform {
  std::variant<AddState, AddTransition, RemoveState, RefactorStates> kind;
  std::map<std::string, std::string> metadata;
};

std::string describe_transform(const ModelTransform& t);

/// Applies one transformation and records it in the result's provenance.
/// Throws UnknownState, StateInUse, InvalidSpec or AlreadyRefactored.
AbmSpec augment(const AbmSpec& spec, const ModelTransform& t);

struct RefactorResult {
  AbmSpec spec;
  /// From abm_typegraph(spec) (refactored) to abm_typegraph of the input.
  GraphMorphism morphism;
};

/// Moves states from one shared Symbol type to one singleton type each.
/// Names come from `type_names`, falling back to Susceptible / Infected /
/// Recovered / Dead for S / I / R / D and to the state name otherwise.
RefactorResult refactor_states(const AbmSpec& spec,
                               const std::map<std::string, std::string>& type_names = {});

/// Type graph of the simulation program for this spec, as a dynamic trace
/// of it would produce: model accessors, agent vector access, population
/// counting, and one transition function per state (anonymous functions on
/// Symbol, or a `transition` method per singleton type).
TypeGraph abm_typegraph(const AbmSpec& spec);

struct StateSummary {
  std::string state;
  std::uint64_t peak = 0;
  std::size_t peak_time = 0;  // first time the peak is reached
  std::uint64_t final_count = 0;
  double mean = 0.0;  // over every recorded row, including t = 0
};

std::vector<StateSummary> describe(const Trajectory& trajectory);

/// CSV with header "step,<state>,...".
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace metamodel
