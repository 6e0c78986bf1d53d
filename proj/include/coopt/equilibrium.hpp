#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopt/discrete_dynamics.hpp"
#include "coopt/model.hpp"

namespace coopt {

struct EpsilonCertificate {
  double epsilon = 0.0;
  std::vector<double> gains;        // per agent, >= 0
  std::vector<int> best_deviation;  // per agent, lowest-index best pure action
};

using PureProfile = std::vector<int>;  // one action per agent

struct SweepRow {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  bool converged = false;
  int iterations = 0;
  std::optional<double> epsilon;   // utility instances
  double welfare = 0.0;
  std::optional<bool> global_hit;  // energy instances
  std::string error;               // empty unless the cell failed
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  std::vector<double> alpha_grid;
  int restarts = 1;
  std::uint64_t base_seed = 0;
  double tol = kDefaultTolerance;
  int max_iter = kDefaultMaxIterations;
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

inline constexpr double kMaxPureProfiles = 1e6;

// Expected utility of `agent` under the product distribution. Utility mode.
double expected_payoff(const GameModel& model, const StrategyProfile& profile,
                       std::size_t agent);

// Expected utility of each of the agent's pure actions against the others'
// marginals. Utility mode.
std::vector<double> action_payoffs(const GameModel& model,
                                   const StrategyProfile& profile,
                                   std::size_t agent);

EpsilonCertificate epsilon_of_profile(const GameModel& model,
                                      const StrategyProfile& profile);

// All pure profiles where no agent has a strictly improving unilateral
// deviation, in row-major order over agents. Utility mode.
std::vector<PureProfile> enumerate_pure_nash(const GameModel& model);

StrategyProfile point_mass(const GameModel& model, const PureProfile& actions);

// Mean of per-agent expected payoffs. Energy models are scored through
// u = exp(-E/hbar).
double social_welfare(const GameModel& model, const StrategyProfile& profile);

// sum_i E_i(x) for a pure assignment of an energy model.
double total_energy(const GameModel& model, const PureProfile& actions);

// Exhaustive minimum of total_energy over every joint assignment.
double global_minimum_energy(const GameModel& model);

// Per-agent argmax decode with lowest-index tie-breaking.
PureProfile decode_argmax(const StrategyProfile& profile);

// Runs iterate_to_fixed_point for every (alpha, restart) cell. Restart 0 is
// uniform; restart r > 0 uses random_profile(model, base_seed + r). Rows are
// ordered by (alpha index, restart) regardless of scheduling.
SweepReport alpha_sweep(const GameModel& model, const SweepOptions& options);

}  // namespace coopt
