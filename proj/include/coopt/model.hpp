#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace coopt {

// A discrete action variable owned by exactly one agent.
struct DomainSpec {
  std::string name;
  int cardinality = 0;
};

// Full joint table over `order`; row-major, last variable varies fastest.
struct DenseTable {
  std::vector<std::string> order;
  std::vector<double> values;
};

struct DenseEnergy : DenseTable {};
struct DenseUtility : DenseTable {};

// E_i(x) = sum over terms of table[own_action][other_action].
struct PairwiseTerm {
  std::string with;
  std::vector<std::vector<double>> table;
};

struct PairwiseEnergy {
  std::vector<PairwiseTerm> terms;
};

using AgentObjective = std::variant<DenseEnergy, PairwiseEnergy, DenseUtility>;

struct Agent {
  std::string name;
  std::string acts_on;
  AgentObjective objective;
};

enum class Mode { kEnergy, kUtility };

inline constexpr double kDefaultHbar = 1.0;

struct GameModel {
  std::vector<DomainSpec> variables;
  std::vector<Agent> agents;
  double hbar = kDefaultHbar;
  Mode mode = Mode::kEnergy;

  // Index into `variables`, or -1.
  int variable_index(const std::string& name) const;
  // Variable index the agent acts on. Requires a validated model.
  int agent_variable(std::size_t agent) const;
  // Agent index acting on the given variable. Requires a validated model.
  int variable_agent(std::size_t variable) const;
  int num_actions(std::size_t agent) const;
  std::size_t num_agents() const { return agents.size(); }
};

// One probability vector per agent, indexed like GameModel::agents.
using StrategyProfile = std::vector<std::vector<double>>;

// A single validation failure. `path` is a JSON-pointer-like location
// (e.g. "/agents/0/objective/dense/values") so the CLI can anchor it.
struct Issue {
  std::string path;
  std::string message;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Issue> issues);
  const std::vector<Issue>& issues() const { return issues_; }

 private:
  std::vector<Issue> issues_;
};

// Every invariant violation of the model, in document order. Empty iff valid.
std::vector<Issue> check(const GameModel& model);

// Returns the model iff it is valid; throws ValidationError listing every
// violation otherwise.
GameModel validate(GameModel model);

// u = exp(-E / hbar), elementwise.
DenseUtility energy_to_utility(const DenseEnergy& objective, double hbar);

// Sums pairwise terms into a dense table ordered [own, with_1, with_2, ...].
DenseEnergy densify(const PairwiseEnergy& objective, const std::string& own,
                    const GameModel& model);

// Model with every objective in dense form (pairwise terms densified).
GameModel densified(const GameModel& model);

// Utility-mode copy of an energy model (u = exp(-E/hbar)).
GameModel to_utility_model(const GameModel& model);

StrategyProfile uniform_profile(const GameModel& model);

// Throws Error unless the profile matches the model's shape and every agent's
// vector is a distribution (entries >= 0, sum within 1e-12 of 1).
void check_profile(const GameModel& model, const StrategyProfile& profile);

// Calls fn(assignment) for every joint assignment of the variables listed in
// `cardinalities`, in row-major order (last index fastest).
template <typename Fn>
void for_each_assignment(const std::vector<int>& cardinalities, Fn&& fn) {
  std::vector<int> index(cardinalities.size(), 0);
  for (int c : cardinalities) {
    if (c <= 0) return;
  }
  while (true) {
    fn(static_cast<const std::vector<int>&>(index));
    std::size_t k = index.size();
    while (k > 0) {
      --k;
      if (++index[k] < cardinalities[k]) break;
      index[k] = 0;
      if (k == 0) return;
    }
    if (index.empty()) return;
  }
}

}  // namespace coopt
