#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coopt/model.hpp"

namespace coopt {

// Per-agent expected returns Psi_i(x_i), held as ln(Psi) so that tiny hbar
// does not underflow. A zero return is -inf.
struct ExpectedReturnField {
  std::vector<std::vector<double>> log_values;

  std::vector<std::vector<double>> linear() const;
  std::size_t num_agents() const { return log_values.size(); }
};

struct IterationStep {
  int step = 0;
  double max_change = 0.0;
  StrategyProfile profile;
  ExpectedReturnField field;  // the field the profile was normalized from
};

using IterationTrace = std::vector<IterationStep>;

struct FixedPointResult {
  StrategyProfile profile;
  bool converged = false;
  int iterations = 0;
  double max_change = 0.0;
  ExpectedReturnField field;  // evaluated at the final profile
};

inline constexpr double kMaxAlpha = 1e6;
inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr int kDefaultMaxIterations = 10000;

struct IterationOptions {
  double alpha = 1.0;
  double tol = kDefaultTolerance;
  int max_iter = kDefaultMaxIterations;
  // Uniform when empty.
  std::optional<StrategyProfile> init;
  bool record_trace = false;
};

// Raised when the iteration produces a non-finite value.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Exact enumeration over each agent's objective table. Pairwise objectives are
// densified first.
ExpectedReturnField expected_return_update(const GameModel& model,
                                           const StrategyProfile& profile);

// Product-of-sums form for pairwise energies:
//   ln Psi_i(x_i) = sum_j ln sum_{x_j} exp(-E_ij(x_i, x_j)/hbar) p_j(x_j).
// Throws Error if any objective is not pairwise.
ExpectedReturnField expected_return_update_factorized(
    const GameModel& model, const StrategyProfile& profile);

// Per agent, the factorized form for pairwise objectives and enumeration for
// dense ones. This is what the iteration uses.
ExpectedReturnField expected_returns(const GameModel& model,
                                     const StrategyProfile& profile);

// p_i ∝ Psi_i^alpha, normalized in log domain.
StrategyProfile normalize_policy(const ExpectedReturnField& field, double alpha);

// Synchronous iteration of update∘normalize from the t-1 profile.
// Non-convergence is reported through FixedPointResult::converged.
FixedPointResult iterate_to_fixed_point(const GameModel& model,
                                        const IterationOptions& options,
                                        IterationTrace* trace = nullptr);

// Normalized positive pseudo-random profile from a SplitMix64 stream.
StrategyProfile random_profile(const GameModel& model, std::uint64_t seed);

// Lowest index whose value is within 1e-15 relative of the maximum.
int argmax_lowest(const std::vector<double>& values);

double max_profile_change(const StrategyProfile& a, const StrategyProfile& b);

}  // namespace coopt
