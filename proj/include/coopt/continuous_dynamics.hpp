#pragma once

#include <optional>
#include <vector>

#include "coopt/model.hpp"
#include "coopt/numerics.hpp"

namespace coopt {

// One unit-norm real amplitude vector per agent (a single entry for the
// linear evolution).
using WaveState = std::vector<Vector>;

struct StationarityResult {
  double lambda = 0.0;  // Rayleigh quotient <psi|H|psi>
  double residual = 0.0;  // ||H psi - lambda psi||_2
};

struct AgentStationarity {
  double lambda = 0.0;
  double residual = 0.0;
  std::optional<int> matched_eigenvalue_index;
  std::optional<double> matched_eigenvalue;
};

struct StationaryReport {
  std::vector<AgentStationarity> agents;
  double evolution_time = 0.0;
  int steps = 0;
  bool converged = false;
};

struct TrajectoryPoint {
  double t = 0.0;
  int step = 0;
  WaveState state;
  std::vector<StationarityResult> stationarity;  // per agent
};

using Trajectory = std::vector<TrajectoryPoint>;

inline constexpr double kDefaultStationarityTol = 1e-8;
inline constexpr double kDefaultTMax = 1000.0;

struct EvolutionOptions {
  double hbar = 1.0;
  // Defaults to 0.01 * hbar / max|diag H| (0.01 * hbar when the diagonal is 0).
  std::optional<double> dt;
  double t_max = kDefaultTMax;
  double tol = kDefaultStationarityTol;
  // Record every n-th step in the trajectory; 0 records nothing. The initial
  // and final states are always recorded when n > 0.
  int record_every = 0;
  // Orthonormal vectors projected out after every step (excited states).
  std::vector<Vector> deflate;
};

struct EvolutionResult {
  WaveState final_state;
  StationaryReport report;
  Trajectory trajectory;
};

// lambda = <psi|H|psi>, residual = ||H psi - lambda psi||_2.
StationarityResult stationarity_check(const HermitianOperator& h,
                                      std::span<const double> psi);

// Diagonal e_i(x_i): expectation of E_i over the other agents' |psi_j|^2.
// Energy mode only.
HermitianOperator effective_hamiltonian(const GameModel& model,
                                        const WaveState& state,
                                        std::size_t agent);

// Renormalized imaginary-time flow d psi/dt = -(1/hbar) H psi, RK4 steps with
// unit-norm projection after each. Stops when the residual is <= tol or at
// t_max. Throws Error if dt * ||H|| / hbar > 1 or the state goes non-finite.
EvolutionResult evolve_linear(const HermitianOperator& h, const Vector& psi0,
                              const EvolutionOptions& options = {});

// Coupled flow: each step freezes every agent's effective Hamiltonian from the
// same state snapshot, advances every psi_i one RK4 step, and renormalizes.
EvolutionResult evolve_coupled(const GameModel& model, const WaveState& state0,
                               const EvolutionOptions& options = {});

// Uniform amplitudes 1/sqrt(cardinality) for every agent.
WaveState uniform_wave_state(const GameModel& model);

// The k lowest stationary states, each found from psi0 with all previously
// found states deflated.
std::vector<EvolutionResult> lowest_states(const HermitianOperator& h,
                                           const Vector& psi0, int k,
                                           const EvolutionOptions& options = {});

// Fills matched_eigenvalue_index for every agent whose lambda lies within
// `tolerance` of an eigenvalue of `oracle` (nearest wins).
void match_eigenvalues(AgentStationarity& entry,
                       const EigenDecomposition& oracle, double tolerance);

// Central-difference -1/2 d^2/dx^2 with Dirichlet boundaries plus V on the
// grid x_k = xmin + k h, h = (xmax - xmin) / (n - 1).
HermitianOperator build_grid_hamiltonian(double xmin, double xmax, int n_points,
                                         const Vector& potential);

Vector grid_points(double xmin, double xmax, int n_points);

}  // namespace coopt
