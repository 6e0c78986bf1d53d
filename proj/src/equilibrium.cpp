#include "coopt/equilibrium.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace coopt {
namespace {

const DenseUtility& utility_table(const GameModel& model, std::size_t agent) {
  if (model.mode != Mode::kUtility) {
    throw Error("payoffs require a utility-mode model (convert energies first)");
  }
  return std::get<DenseUtility>(model.agents.at(agent).objective);
}

struct TableLayout {
  std::vector<int> cards;
  std::vector<int> owner;  // agent per table position
  std::size_t own_pos = 0;
};

TableLayout layout(const GameModel& model, const DenseTable& table,
                   std::size_t agent) {
  TableLayout out;
  for (std::size_t k = 0; k < table.order.size(); ++k) {
    const int v = model.variable_index(table.order[k]);
    out.cards.push_back(model.variables[v].cardinality);
    out.owner.push_back(model.variable_agent(v));
    if (table.order[k] == model.agents[agent].acts_on) out.own_pos = k;
  }
  return out;
}

// Table entry at a pure assignment given per agent.
double table_at(const GameModel& model, const DenseTable& table,
                const PureProfile& actions) {
  std::size_t flat = 0;
  for (const auto& name : table.order) {
    const int v = model.variable_index(name);
    flat = flat * model.variables[v].cardinality +
           actions[model.variable_agent(v)];
  }
  return table.values[flat];
}

double agent_energy(const GameModel& model, std::size_t agent,
                    const PureProfile& actions) {
  const auto& objective = model.agents[agent].objective;
  if (const auto* dense = std::get_if<DenseEnergy>(&objective)) {
    return table_at(model, *dense, actions);
  }
  if (const auto* pairwise = std::get_if<PairwiseEnergy>(&objective)) {
    double sum = 0.0;
    for (const auto& term : pairwise->terms) {
      const int j = model.variable_agent(model.variable_index(term.with));
      sum += term.table[actions[agent]][actions[j]];
    }
    return sum;
  }
  throw Error("energy requested from a utility-mode model");
}

std::vector<int> agent_cardinalities(const GameModel& model) {
  std::vector<int> cards;
  double product = 1.0;
  for (std::size_t a = 0; a < model.num_agents(); ++a) {
    cards.push_back(model.num_actions(a));
    product *= cards.back();
  }
  if (product > kMaxPureProfiles) {
    throw Error("instance too large for exhaustive enumeration: " +
                std::to_string(static_cast<long long>(product)) +
                " joint assignments");
  }
  return cards;
}

}  // namespace

double expected_payoff(const GameModel& model, const StrategyProfile& profile,
                       std::size_t agent) {
  const auto& table = utility_table(model, agent);
  check_profile(model, profile);
  const auto lay = layout(model, table, agent);
  double sum = 0.0;
  std::size_t flat = 0;
  for_each_assignment(lay.cards, [&](const std::vector<int>& x) {
    double w = table.values[flat++];
    for (std::size_t k = 0; k < x.size(); ++k) w *= profile[lay.owner[k]][x[k]];
    sum += w;
  });
  return sum;
}

std::vector<double> action_payoffs(const GameModel& model,
                                   const StrategyProfile& profile,
                                   std::size_t agent) {
  const auto& table = utility_table(model, agent);
  check_profile(model, profile);
  const auto lay = layout(model, table, agent);
  std::vector<double> out(lay.cards[lay.own_pos], 0.0);
  std::size_t flat = 0;
  for_each_assignment(lay.cards, [&](const std::vector<int>& x) {
    double w = table.values[flat++];
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (k != lay.own_pos) w *= profile[lay.owner[k]][x[k]];
    }
    out[x[lay.own_pos]] += w;
  });
  return out;
}

EpsilonCertificate epsilon_of_profile(const GameModel& model,
                                      const StrategyProfile& profile) {
  EpsilonCertificate cert;
  for (std::size_t a = 0; a < model.num_agents(); ++a) {
    const auto payoffs = action_payoffs(model, profile, a);
    const int best = static_cast<int>(
        std::max_element(payoffs.begin(), payoffs.end()) - payoffs.begin());
    // best - sum_k p_k u_k, written as sum_k p_k (best - u_k): no cancellation
    // when the mixed strategy is nearly pure.
    double gain = 0.0;
    for (std::size_t k = 0; k < payoffs.size(); ++k) {
      gain += profile[a][k] * (payoffs[best] - payoffs[k]);
    }
    gain = std::max(0.0, gain);
    cert.gains.push_back(gain);
    cert.best_deviation.push_back(best);
    cert.epsilon = std::max(cert.epsilon, gain);
  }
  return cert;
}

std::vector<PureProfile> enumerate_pure_nash(const GameModel& model) {
  for (std::size_t a = 0; a < model.num_agents(); ++a) utility_table(model, a);
  const auto cards = agent_cardinalities(model);
  std::vector<PureProfile> out;
  for_each_assignment(cards, [&](const std::vector<int>& x) {
    PureProfile deviated = x;
    for (std::size_t a = 0; a < x.size(); ++a) {
      const auto& table = std::get<DenseUtility>(model.agents[a].objective);
      const double here = table_at(model, table, x);
      for (int alt = 0; alt < cards[a]; ++alt) {
        if (alt == x[a]) continue;
        deviated[a] = alt;
        const double there = table_at(model, table, deviated);
        deviated[a] = x[a];
        if (there > here) return;
      }
    }
    out.push_back(x);
  });
  return out;
}

StrategyProfile point_mass(const GameModel& model, const PureProfile& actions) {
  if (actions.size() != model.num_agents()) {
    throw Error("pure profile has the wrong number of agents");
  }
  StrategyProfile profile;
  for (std::size_t a = 0; a < actions.size(); ++a) {
    auto& p = profile.emplace_back(model.num_actions(a), 0.0);
    p.at(actions[a]) = 1.0;
  }
  return profile;
}

double social_welfare(const GameModel& model, const StrategyProfile& profile) {
  const GameModel& scored =
      model.mode == Mode::kUtility ? model : to_utility_model(model);
  double sum = 0.0;
  for (std::size_t a = 0; a < scored.num_agents(); ++a) {
    sum += expected_payoff(scored, profile, a);
  }
  return sum / static_cast<double>(scored.num_agents());
}

double total_energy(const GameModel& model, const PureProfile& actions) {
  double sum = 0.0;
  for (std::size_t a = 0; a < model.num_agents(); ++a) {
    sum += agent_energy(model, a, actions);
  }
  return sum;
}

double global_minimum_energy(const GameModel& model) {
  const auto cards = agent_cardinalities(model);
  double best = std::numeric_limits<double>::infinity();
  for_each_assignment(cards, [&](const std::vector<int>& x) {
    best = std::min(best, total_energy(model, x));
  });
  return best;
}

PureProfile decode_argmax(const StrategyProfile& profile) {
  PureProfile out;
  for (const auto& p : profile) out.push_back(argmax_lowest(p));
  return out;
}

SweepReport alpha_sweep(const GameModel& model, const SweepOptions& options) {
  if (options.alpha_grid.empty()) throw Error("alpha grid is empty");
  if (options.restarts < 1) throw Error("restarts must be >= 1");
  for (double alpha : options.alpha_grid) {
    if (!(alpha > 0.0) || alpha > kMaxAlpha) {
      throw Error("alpha grid values must lie in (0, 1e6]");
    }
  }

  std::optional<double> energy_floor;
  std::optional<GameModel> utility_model;
  if (model.mode == Mode::kEnergy) {
    try {
      energy_floor = global_minimum_energy(model);
    } catch (const Error&) {
      // Too large to search; global_hit stays empty.
    }
    utility_model = to_utility_model(model);
  }
  const GameModel& scored = utility_model ? *utility_model : model;

  const std::size_t restarts = static_cast<std::size_t>(options.restarts);
  SweepReport report;
  report.rows.resize(options.alpha_grid.size() * restarts);

  auto run_cell = [&](std::size_t cell) {
    SweepRow& row = report.rows[cell];
    const std::size_t r = cell % restarts;
    row.alpha = options.alpha_grid[cell / restarts];
    row.seed = options.base_seed + r;
    try {
      IterationOptions it;
      it.alpha = row.alpha;
      it.tol = options.tol;
      it.max_iter = options.max_iter;
      if (r > 0) it.init = random_profile(model, row.seed);
      const auto result = iterate_to_fixed_point(model, it);
      row.converged = result.converged;
      row.iterations = result.iterations;
      row.welfare = social_welfare(scored, result.profile);
      if (model.mode == Mode::kUtility) {
        row.epsilon = epsilon_of_profile(model, result.profile).epsilon;
      } else if (energy_floor) {
        const double e = total_energy(model, decode_argmax(result.profile));
        row.global_hit = e <= *energy_floor + 1e-12 * (1.0 + std::abs(*energy_floor));
      }
    } catch (const std::exception& e) {
      row.converged = false;
      row.error = e.what();
    }
  };

  const std::size_t cells = report.rows.size();
  unsigned threads = options.threads ? options.threads
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t cell = next++; cell < cells; cell = next++) run_cell(cell);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return report;
}

}  // namespace coopt
