#include "coopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace coopt {
namespace {

std::string summarize(const std::vector<Issue>& issues) {
  std::ostringstream out;
  out << "invalid model (" << issues.size() << " issue"
      << (issues.size() == 1 ? "" : "s") << ")";
  for (const auto& issue : issues) {
    out << "\n  " << issue.path << ": " << issue.message;
  }
  return out.str();
}

void check_dense(const GameModel& model, const DenseTable& table,
                 const std::string& own, bool utility, const std::string& at,
                 std::vector<Issue>& issues) {
  std::set<std::string> seen;
  bool has_own = false;
  bool known = true;
  double expected = 1.0;
  for (std::size_t k = 0; k < table.order.size(); ++k) {
    const auto& name = table.order[k];
    const std::string where = at + "/order/" + std::to_string(k);
    if (!seen.insert(name).second) {
      issues.push_back({where, "duplicate variable '" + name + "'"});
    }
    if (name == own) has_own = true;
    const int v = model.variable_index(name);
    if (v < 0) {
      issues.push_back({where, "unknown variable '" + name + "'"});
      known = false;
      continue;
    }
    expected *= std::max(model.variables[v].cardinality, 0);
  }
  if (!has_own) {
    issues.push_back({at + "/order", "must contain the agent's own variable '" +
                                         own + "'"});
  }
  if (known && static_cast<double>(table.values.size()) != expected) {
    std::ostringstream msg;
    msg << "shape mismatch: " << table.values.size()
        << " values for a domain of size " << expected;
    issues.push_back({at + "/values", msg.str()});
  }
  for (std::size_t k = 0; k < table.values.size(); ++k) {
    const double v = table.values[k];
    const std::string where = at + "/values/" + std::to_string(k);
    if (!std::isfinite(v)) {
      issues.push_back({where, "value must be finite"});
    } else if (utility && v < 0.0) {
      issues.push_back({where, "utility must be >= 0"});
    }
  }
}

void check_pairwise(const GameModel& model, const PairwiseEnergy& objective,
                    const std::string& own, const std::string& at,
                    std::vector<Issue>& issues) {
  const int own_var = model.variable_index(own);
  std::set<std::string> seen;
  for (std::size_t t = 0; t < objective.terms.size(); ++t) {
    const auto& term = objective.terms[t];
    const std::string where = at + "/" + std::to_string(t);
    if (!seen.insert(term.with).second) {
      issues.push_back({where + "/with",
                        "variable '" + term.with + "' listed more than once"});
    }
    if (term.with == own) {
      issues.push_back({where + "/with", "pairwise term cannot reference the "
                                         "agent's own variable"});
    }
    const int other = model.variable_index(term.with);
    if (other < 0) {
      issues.push_back({where + "/with", "unknown variable '" + term.with + "'"});
    }
    if (own_var >= 0 && static_cast<int>(term.table.size()) !=
                            model.variables[own_var].cardinality) {
      issues.push_back({where + "/table",
                        "shape mismatch: expected " +
                            std::to_string(model.variables[own_var].cardinality) +
                            " rows, got " + std::to_string(term.table.size())});
    }
    for (std::size_t r = 0; r < term.table.size(); ++r) {
      const auto& row = term.table[r];
      if (other >= 0 &&
          static_cast<int>(row.size()) != model.variables[other].cardinality) {
        issues.push_back({where + "/table/" + std::to_string(r),
                          "shape mismatch: expected " +
                              std::to_string(model.variables[other].cardinality) +
                              " columns, got " + std::to_string(row.size())});
      }
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (!std::isfinite(row[c])) {
          issues.push_back({where + "/table/" + std::to_string(r) + "/" +
                                std::to_string(c),
                            "value must be finite"});
        }
      }
    }
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(summarize(issues)), issues_(std::move(issues)) {}

int GameModel::variable_index(const std::string& name) const {
  for (std::size_t v = 0; v < variables.size(); ++v) {
    if (variables[v].name == name) return static_cast<int>(v);
  }
  return -1;
}

int GameModel::agent_variable(std::size_t agent) const {
  return variable_index(agents.at(agent).acts_on);
}

int GameModel::variable_agent(std::size_t variable) const {
  const auto& name = variables.at(variable).name;
  for (std::size_t a = 0; a < agents.size(); ++a) {
    if (agents[a].acts_on == name) return static_cast<int>(a);
  }
  return -1;
}

int GameModel::num_actions(std::size_t agent) const {
  return variables.at(agent_variable(agent)).cardinality;
}

std::vector<Issue> check(const GameModel& model) {
  std::vector<Issue> issues;
  if (!(model.hbar > 0.0) || !std::isfinite(model.hbar)) {
    issues.push_back({"/hbar", "hbar must be a finite number > 0"});
  }
  if (model.variables.empty()) {
    issues.push_back({"/variables", "at least one variable is required"});
  }
  std::set<std::string> names;
  for (std::size_t v = 0; v < model.variables.size(); ++v) {
    const auto& var = model.variables[v];
    const std::string at = "/variables/" + std::to_string(v);
    if (var.name.empty()) {
      issues.push_back({at + "/name", "name must be non-empty"});
    }
    if (!names.insert(var.name).second) {
      issues.push_back({at + "/name", "duplicate variable '" + var.name + "'"});
    }
    if (var.cardinality < 2) {
      issues.push_back({at + "/cardinality", "cardinality must be >= 2"});
    }
  }

  std::set<std::string> agent_names;
  std::set<std::string> claimed;
  for (std::size_t a = 0; a < model.agents.size(); ++a) {
    const auto& agent = model.agents[a];
    const std::string at = "/agents/" + std::to_string(a);
    if (!agent_names.insert(agent.name).second) {
      issues.push_back({at + "/name", "duplicate agent '" + agent.name + "'"});
    }
    if (model.variable_index(agent.acts_on) < 0) {
      issues.push_back(
          {at + "/acts_on", "unknown variable '" + agent.acts_on + "'"});
    } else if (!claimed.insert(agent.acts_on).second) {
      issues.push_back({at + "/acts_on", "variable '" + agent.acts_on +
                                             "' already has an agent"});
    }
    const std::string obj = at + "/objective";
    if (const auto* e = std::get_if<DenseEnergy>(&agent.objective)) {
      if (model.mode != Mode::kEnergy) {
        issues.push_back({obj, "energy objective in utility mode"});
      }
      check_dense(model, *e, agent.acts_on, false, obj + "/dense", issues);
    } else if (const auto* u = std::get_if<DenseUtility>(&agent.objective)) {
      if (model.mode != Mode::kUtility) {
        issues.push_back({obj, "utility objective in energy mode"});
      }
      check_dense(model, *u, agent.acts_on, true, obj + "/dense", issues);
    } else {
      if (model.mode != Mode::kEnergy) {
        issues.push_back({obj, "pairwise objectives require energy mode"});
      }
      check_pairwise(model, std::get<PairwiseEnergy>(agent.objective),
                     agent.acts_on, obj + "/pairwise", issues);
    }
  }
  for (std::size_t v = 0; v < model.variables.size(); ++v) {
    if (!claimed.count(model.variables[v].name)) {
      issues.push_back({"/variables/" + std::to_string(v),
                        "variable '" + model.variables[v].name +
                            "' has no agent"});
    }
  }
  return issues;
}

GameModel validate(GameModel model) {
  auto issues = check(model);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return model;
}

DenseUtility energy_to_utility(const DenseEnergy& objective, double hbar) {
  if (!(hbar > 0.0)) throw Error("hbar must be > 0");
  DenseUtility out;
  out.order = objective.order;
  out.values.reserve(objective.values.size());
  for (double e : objective.values) out.values.push_back(std::exp(-e / hbar));
  return out;
}

DenseEnergy densify(const PairwiseEnergy& objective, const std::string& own,
                    const GameModel& model) {
  DenseEnergy out;
  out.order.push_back(own);
  std::vector<int> cards;
  const int own_var = model.variable_index(own);
  if (own_var < 0) throw Error("unknown variable '" + own + "'");
  cards.push_back(model.variables[own_var].cardinality);
  for (const auto& term : objective.terms) {
    const int v = model.variable_index(term.with);
    if (v < 0) throw Error("unknown variable '" + term.with + "'");
    out.order.push_back(term.with);
    cards.push_back(model.variables[v].cardinality);
  }
  for_each_assignment(cards, [&](const std::vector<int>& x) {
    double sum = 0.0;
    for (std::size_t t = 0; t < objective.terms.size(); ++t) {
      sum += objective.terms[t].table.at(x[0]).at(x[t + 1]);
    }
    out.values.push_back(sum);
  });
  return out;
}

GameModel densified(const GameModel& model) {
  GameModel out = model;
  for (auto& agent : out.agents) {
    if (const auto* p = std::get_if<PairwiseEnergy>(&agent.objective)) {
      agent.objective = densify(*p, agent.acts_on, model);
    }
  }
  return out;
}

GameModel to_utility_model(const GameModel& model) {
  if (model.mode == Mode::kUtility) return model;
  GameModel out = densified(model);
  out.mode = Mode::kUtility;
  for (auto& agent : out.agents) {
    agent.objective =
        energy_to_utility(std::get<DenseEnergy>(agent.objective), model.hbar);
  }
  return out;
}

StrategyProfile uniform_profile(const GameModel& model) {
  StrategyProfile profile;
  for (std::size_t a = 0; a < model.num_agents(); ++a) {
    const int n = model.num_actions(a);
    profile.emplace_back(n, 1.0 / n);
  }
  return profile;
}

void check_profile(const GameModel& model, const StrategyProfile& profile) {
  if (profile.size() != model.num_agents()) {
    throw Error("profile has " + std::to_string(profile.size()) +
                " agents, model has " + std::to_string(model.num_agents()));
  }
  for (std::size_t a = 0; a < profile.size(); ++a) {
    const auto& p = profile[a];
    const auto& name = model.agents[a].name;
    if (static_cast<int>(p.size()) != model.num_actions(a)) {
      throw Error("profile for agent '" + name + "' has " +
                  std::to_string(p.size()) + " entries, expected " +
                  std::to_string(model.num_actions(a)));
    }
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error("profile for agent '" + name +
                    "' has a negative or non-finite entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "profile for agent '" << name << "' sums to " << sum;
      throw Error(msg.str());
    }
  }
}

}  // namespace coopt
