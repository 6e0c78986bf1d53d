#include "coopt/discrete_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "coopt/numerics.hpp"
#include "coopt/rng.hpp"

namespace coopt {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

std::vector<std::vector<double>> log_profile(const StrategyProfile& profile) {
  std::vector<std::vector<double>> out;
  out.reserve(profile.size());
  for (const auto& p : profile) {
    auto& row = out.emplace_back();
    row.reserve(p.size());
    for (double v : p) row.push_back(safe_log(v));
  }
  return out;
}

// ln Psi for one agent from a dense table whose entries carry log-weights.
std::vector<double> dense_log_returns(
    const GameModel& model, std::size_t agent, const DenseTable& table,
    bool energy, const std::vector<std::vector<double>>& log_p) {
  const std::string& own = model.agents[agent].acts_on;
  std::vector<int> cards;
  std::vector<int> owner;  // agent acting on each table position
  std::size_t own_pos = 0;
  for (std::size_t k = 0; k < table.order.size(); ++k) {
    const int v = model.variable_index(table.order[k]);
    cards.push_back(model.variables[v].cardinality);
    owner.push_back(model.variable_agent(v));
    if (table.order[k] == own) own_pos = k;
  }
  const int n_own = cards[own_pos];
  std::vector<std::vector<double>> terms(n_own);
  std::size_t flat = 0;
  for_each_assignment(cards, [&](const std::vector<int>& x) {
    const double value = table.values[flat++];
    double term = energy ? -value / model.hbar : safe_log(value);
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (k == own_pos) continue;
      term += log_p[owner[k]][x[k]];
    }
    terms[x[own_pos]].push_back(term);
  });
  std::vector<double> out(n_own);
  for (int a = 0; a < n_own; ++a) out[a] = log_sum_exp(terms[a]);
  return out;
}

std::vector<double> pairwise_log_returns(
    const GameModel& model, std::size_t agent, const PairwiseEnergy& objective,
    const std::vector<std::vector<double>>& log_p) {
  const int n_own = model.num_actions(agent);
  std::vector<double> out(n_own, 0.0);
  std::vector<double> terms;
  for (const auto& term : objective.terms) {
    const int j = model.variable_agent(model.variable_index(term.with));
    const auto& lp = log_p[j];
    for (int a = 0; a < n_own; ++a) {
      terms.assign(lp.size(), 0.0);
      for (std::size_t b = 0; b < lp.size(); ++b) {
        terms[b] = -term.table[a][b] / model.hbar + lp[b];
      }
      out[a] += log_sum_exp(terms);
    }
  }
  return out;
}

std::vector<double> agent_log_returns(
    const GameModel& model, std::size_t agent, bool factorize,
    const std::vector<std::vector<double>>& log_p) {
  const auto& objective = model.agents[agent].objective;
  if (const auto* e = std::get_if<DenseEnergy>(&objective)) {
    return dense_log_returns(model, agent, *e, true, log_p);
  }
  if (const auto* u = std::get_if<DenseUtility>(&objective)) {
    return dense_log_returns(model, agent, *u, false, log_p);
  }
  const auto& pairwise = std::get<PairwiseEnergy>(objective);
  if (factorize) return pairwise_log_returns(model, agent, pairwise, log_p);
  const auto dense = densify(pairwise, model.agents[agent].acts_on, model);
  return dense_log_returns(model, agent, dense, true, log_p);
}

ExpectedReturnField compute(const GameModel& model,
                            const StrategyProfile& profile, bool factorize) {
  check_profile(model, profile);
  const auto log_p = log_profile(profile);
  ExpectedReturnField field;
  field.log_values.reserve(model.num_agents());
  for (std::size_t a = 0; a < model.num_agents(); ++a) {
    field.log_values.push_back(agent_log_returns(model, a, factorize, log_p));
  }
  return field;
}

}  // namespace

std::vector<std::vector<double>> ExpectedReturnField::linear() const {
  std::vector<std::vector<double>> out;
  out.reserve(log_values.size());
  for (const auto& row : log_values) {
    auto& lin = out.emplace_back();
    for (double v : row) lin.push_back(std::exp(v));
  }
  return out;
}

ExpectedReturnField expected_return_update(const GameModel& model,
                                           const StrategyProfile& profile) {
  return compute(model, profile, false);
}

ExpectedReturnField expected_return_update_factorized(
    const GameModel& model, const StrategyProfile& profile) {
  for (const auto& agent : model.agents) {
    if (!std::holds_alternative<PairwiseEnergy>(agent.objective)) {
      throw Error("factorized update requires pairwise objectives; agent '" +
                  agent.name + "' is dense");
    }
  }
  return compute(model, profile, true);
}

ExpectedReturnField expected_returns(const GameModel& model,
                                     const StrategyProfile& profile) {
  return compute(model, profile, true);
}

StrategyProfile normalize_policy(const ExpectedReturnField& field,
                                 double alpha) {
  if (!(alpha > 0.0) || alpha > kMaxAlpha) {
    std::ostringstream msg;
    msg << "alpha must be in (0, " << kMaxAlpha << "], got " << alpha;
    throw Error(msg.str());
  }
  StrategyProfile profile;
  profile.reserve(field.num_agents());
  std::vector<double> scaled;
  for (std::size_t a = 0; a < field.num_agents(); ++a) {
    const auto& log_psi = field.log_values[a];
    scaled.assign(log_psi.size(), 0.0);
    for (std::size_t k = 0; k < log_psi.size(); ++k) {
      scaled[k] = alpha * log_psi[k];
    }
    const double z = log_sum_exp(scaled);
    if (!std::isfinite(z)) {
      throw Error("expected returns of agent " + std::to_string(a) +
                  " are all zero or non-finite");
    }
    auto& p = profile.emplace_back(log_psi.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = std::exp(scaled[k] - z);
      sum += p[k];
    }
    for (double& v : p) v /= sum;
  }
  return profile;
}

FixedPointResult iterate_to_fixed_point(const GameModel& model,
                                        const IterationOptions& options,
                                        IterationTrace* trace) {
  if (!(options.tol > 0.0)) throw Error("tol must be > 0");
  if (options.max_iter <= 0) throw Error("max_iter must be > 0");
  StrategyProfile profile = options.init ? *options.init : uniform_profile(model);
  check_profile(model, profile);

  FixedPointResult result;
  for (int step = 1; step <= options.max_iter; ++step) {
    auto field = expected_returns(model, profile);
    StrategyProfile next;
    try {
      next = normalize_policy(field, options.alpha);
    } catch (const Error& e) {
      throw DivergenceError(
          std::string(e.what()) + " at step " + std::to_string(step), step);
    }
    for (const auto& p : next) {
      for (double v : p) {
        if (!std::isfinite(v)) {
          throw DivergenceError(
              "non-finite profile at step " + std::to_string(step), step);
        }
      }
    }
    const double change = max_profile_change(profile, next);
    profile = std::move(next);
    result.iterations = step;
    result.max_change = change;
    if (trace) trace->push_back({step, change, profile, std::move(field)});
    if (change <= options.tol) {
      result.converged = true;
      break;
    }
  }
  result.field = expected_returns(model, profile);
  result.profile = std::move(profile);
  return result;
}

StrategyProfile random_profile(const GameModel& model, std::uint64_t seed) {
  SplitMix64 rng(seed);
  StrategyProfile profile;
  for (std::size_t a = 0; a < model.num_agents(); ++a) {
    auto& p = profile.emplace_back(model.num_actions(a));
    double sum = 0.0;
    for (double& v : p) {
      v = rng.uniform_positive();
      sum += v;
    }
    for (double& v : p) v /= sum;
  }
  return profile;
}

int argmax_lowest(const std::vector<double>& values) {
  if (values.empty()) throw Error("argmax of an empty vector");
  const double top = *std::max_element(values.begin(), values.end());
  const double slack = 1e-15 * std::abs(top);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] >= top - slack) return static_cast<int>(k);
  }
  return 0;
}

double max_profile_change(const StrategyProfile& a, const StrategyProfile& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, max_abs_diff(a[i], b[i]));
  }
  return m;
}

}  // namespace coopt
