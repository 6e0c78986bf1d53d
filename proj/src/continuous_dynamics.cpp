#include "coopt/continuous_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coopt {
namespace {

void normalize_in_place(Vector& psi, const char* what) {
  const double n = norm2(psi);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(std::string(what) + ": state has zero or non-finite norm");
  }
  for (double& v : psi) v /= n;
}

void project_out(Vector& psi, const std::vector<Vector>& basis) {
  // Two passes of classical Gram-Schmidt keep the state orthogonal to the
  // basis to working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& v : basis) {
      const double c = dot(v, psi);
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] -= c * v[i];
    }
  }
}

double default_dt(double hbar, double scale) {
  return scale > 0.0 ? 0.01 * hbar / scale : 0.01 * hbar;
}

void check_step_size(double dt, double radius, double hbar) {
  if (dt * radius / hbar > 1.0) {
    std::ostringstream msg;
    msg << "dt = " << dt << " is too large: dt * spectral radius / hbar = "
        << dt * radius / hbar << " > 1";
    throw Error(msg.str());
  }
}

Vector rk4_linear(const HermitianOperator& h, const Vector& psi, double dt,
                  double hbar) {
  const double scale = -1.0 / hbar;
  return rk4_step(
      [&](std::span<const double> y, std::span<double> out) {
        h.apply(y, out);
        for (double& v : out) v *= scale;
      },
      psi, dt);
}

void check_options(const EvolutionOptions& options) {
  if (!(options.hbar > 0.0)) throw Error("hbar must be > 0");
  if (!(options.t_max > 0.0)) throw Error("t_max must be > 0");
  if (!(options.tol > 0.0)) throw Error("tol must be > 0");
  if (options.dt && !(*options.dt > 0.0)) throw Error("dt must be > 0");
}

long step_budget(double t_max, double dt) {
  return static_cast<long>(std::ceil(t_max / dt - 1e-9));
}

}  // namespace

StationarityResult stationarity_check(const HermitianOperator& h,
                                      std::span<const double> psi) {
  if (psi.size() != h.dimension()) {
    throw Error("dimension mismatch: operator is " +
                std::to_string(h.dimension()) + ", state is " +
                std::to_string(psi.size()));
  }
  const Vector hpsi = h.apply(psi);
  StationarityResult out;
  out.lambda = dot(psi, hpsi);
  double sum = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double r = hpsi[i] - out.lambda * psi[i];
    sum += r * r;
  }
  out.residual = std::sqrt(sum);
  return out;
}

HermitianOperator effective_hamiltonian(const GameModel& model,
                                        const WaveState& state,
                                        std::size_t agent) {
  if (model.mode != Mode::kEnergy) {
    throw Error("effective Hamiltonian requires an energy-mode model");
  }
  if (state.size() != model.num_agents()) {
    throw Error("wave state has " + std::to_string(state.size()) +
                " agents, model has " + std::to_string(model.num_agents()));
  }
  const int n_own = model.num_actions(agent);
  Vector diag(n_own, 0.0);
  const auto& objective = model.agents[agent].objective;
  const auto& own = model.agents[agent].acts_on;

  if (const auto* pairwise = std::get_if<PairwiseEnergy>(&objective)) {
    for (const auto& term : pairwise->terms) {
      const auto& psi = state[model.variable_agent(model.variable_index(term.with))];
      for (int a = 0; a < n_own; ++a) {
        for (std::size_t b = 0; b < psi.size(); ++b) {
          diag[a] += term.table[a][b] * psi[b] * psi[b];
        }
      }
    }
    return HermitianOperator::diagonal(std::move(diag));
  }

  const auto* dense = std::get_if<DenseEnergy>(&objective);
  if (!dense) throw Error("effective Hamiltonian requires energy objectives");
  std::vector<int> cards;
  std::vector<int> owner;
  std::size_t own_pos = 0;
  for (std::size_t k = 0; k < dense->order.size(); ++k) {
    const int v = model.variable_index(dense->order[k]);
    cards.push_back(model.variables[v].cardinality);
    owner.push_back(model.variable_agent(v));
    if (dense->order[k] == own) own_pos = k;
  }
  std::size_t flat = 0;
  for_each_assignment(cards, [&](const std::vector<int>& x) {
    double weight = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (k == own_pos) continue;
      const double amp = state[owner[k]][x[k]];
      weight *= amp * amp;
    }
    diag[x[own_pos]] += dense->values[flat++] * weight;
  });
  return HermitianOperator::diagonal(std::move(diag));
}

EvolutionResult evolve_linear(const HermitianOperator& h, const Vector& psi0,
                              const EvolutionOptions& options) {
  check_options(options);
  if (psi0.size() != h.dimension()) {
    throw Error("dimension mismatch: operator is " +
                std::to_string(h.dimension()) + ", state is " +
                std::to_string(psi0.size()));
  }
  const double hbar = options.hbar;
  const double dt = options.dt.value_or(default_dt(hbar, h.max_abs_diagonal()));
  check_step_size(dt, h.spectral_radius_bound(), hbar);

  Vector psi = psi0;
  project_out(psi, options.deflate);
  normalize_in_place(psi, "evolve_linear");

  EvolutionResult result;
  auto record = [&](long step, const StationarityResult& st) {
    result.trajectory.push_back({step * dt, static_cast<int>(step), {psi}, {st}});
  };

  const long budget = step_budget(options.t_max, dt);
  long step = 0;
  auto st = stationarity_check(h, psi);
  if (options.record_every > 0) record(0, st);
  bool converged = st.residual <= options.tol;
  while (!converged && step < budget) {
    psi = rk4_linear(h, psi, dt, hbar);
    project_out(psi, options.deflate);
    normalize_in_place(psi, "evolve_linear");
    ++step;
    st = stationarity_check(h, psi);
    converged = st.residual <= options.tol;
    if (options.record_every > 0 &&
        (step % options.record_every == 0 || converged || step == budget)) {
      record(step, st);
    }
  }

  result.final_state = {psi};
  result.report.agents.push_back({st.lambda, st.residual, {}, {}});
  result.report.evolution_time = step * dt;
  result.report.steps = static_cast<int>(step);
  result.report.converged = converged;
  return result;
}

WaveState uniform_wave_state(const GameModel& model) {
  WaveState state;
  for (std::size_t a = 0; a < model.num_agents(); ++a) {
    const int n = model.num_actions(a);
    state.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));
  }
  return state;
}

EvolutionResult evolve_coupled(const GameModel& model, const WaveState& state0,
                               const EvolutionOptions& options) {
  check_options(options);
  if (model.mode != Mode::kEnergy) {
    throw Error("coupled evolution requires an energy-mode model");
  }
  if (state0.size() != model.num_agents()) {
    throw Error("wave state has " + std::to_string(state0.size()) +
                " agents, model has " + std::to_string(model.num_agents()));
  }
  const std::size_t n = model.num_agents();
  WaveState state = state0;
  for (std::size_t a = 0; a < n; ++a) {
    if (static_cast<int>(state[a].size()) != model.num_actions(a)) {
      throw Error("wave state for agent '" + model.agents[a].name +
                  "' has the wrong dimension");
    }
    normalize_in_place(state[a], "evolve_coupled");
  }
  const double hbar = options.hbar;

  auto hamiltonians = [&] {
    std::vector<HermitianOperator> hs;
    hs.reserve(n);
    for (std::size_t a = 0; a < n; ++a) {
      hs.push_back(effective_hamiltonian(model, state, a));
    }
    return hs;
  };
  auto hs = hamiltonians();
  double scale = 0.0;
  for (const auto& h : hs) scale = std::max(scale, h.max_abs_diagonal());
  const double dt = options.dt.value_or(default_dt(hbar, scale));

  EvolutionResult result;
  std::vector<StationarityResult> st(n);
  auto assess = [&] {
    bool all = true;
    for (std::size_t a = 0; a < n; ++a) {
      st[a] = stationarity_check(hs[a], state[a]);
      all = all && st[a].residual <= options.tol;
    }
    return all;
  };
  auto record = [&](long step) {
    result.trajectory.push_back({step * dt, static_cast<int>(step), state, st});
  };

  const long budget = step_budget(options.t_max, dt);
  long step = 0;
  bool converged = assess();
  if (options.record_every > 0) record(0);
  while (!converged && step < budget) {
    for (std::size_t a = 0; a < n; ++a) {
      check_step_size(dt, hs[a].spectral_radius_bound(), hbar);
      state[a] = rk4_linear(hs[a], state[a], dt, hbar);
      normalize_in_place(state[a], "evolve_coupled");
    }
    ++step;
    hs = hamiltonians();
    converged = assess();
    if (options.record_every > 0 &&
        (step % options.record_every == 0 || converged || step == budget)) {
      record(step);
    }
  }

  result.final_state = state;
  for (const auto& s : st) {
    result.report.agents.push_back({s.lambda, s.residual, {}, {}});
  }
  result.report.evolution_time = step * dt;
  result.report.steps = static_cast<int>(step);
  result.report.converged = converged;
  return result;
}

std::vector<EvolutionResult> lowest_states(const HermitianOperator& h,
                                           const Vector& psi0, int k,
                                           const EvolutionOptions& options) {
  if (k < 1) throw Error("number of states must be >= 1");
  if (static_cast<std::size_t>(k) > h.dimension()) {
    throw Error("cannot compute " + std::to_string(k) +
                " states of a dimension-" + std::to_string(h.dimension()) +
                " operator");
  }
  std::vector<EvolutionResult> out;
  EvolutionOptions opts = options;
  for (int s = 0; s < k; ++s) {
    out.push_back(evolve_linear(h, psi0, opts));
    opts.deflate.push_back(out.back().final_state.front());
  }
  return out;
}

void match_eigenvalues(AgentStationarity& entry,
                       const EigenDecomposition& oracle, double tolerance) {
  entry.matched_eigenvalue_index.reset();
  entry.matched_eigenvalue.reset();
  double best = tolerance;
  for (std::size_t k = 0; k < oracle.eigenvalues.size(); ++k) {
    const double d = std::abs(entry.lambda - oracle.eigenvalues[k]);
    if (d <= best) {
      best = d;
      entry.matched_eigenvalue_index = static_cast<int>(k);
      entry.matched_eigenvalue = oracle.eigenvalues[k];
    }
  }
}

Vector grid_points(double xmin, double xmax, int n_points) {
  if (n_points < 3) throw Error("grid needs at least 3 points");
  if (!(xmax > xmin)) throw Error("grid requires xmax > xmin");
  const double h = (xmax - xmin) / (n_points - 1);
  Vector x(n_points);
  for (int k = 0; k < n_points; ++k) x[k] = xmin + k * h;
  return x;
}

HermitianOperator build_grid_hamiltonian(double xmin, double xmax, int n_points,
                                         const Vector& potential) {
  grid_points(xmin, xmax, n_points);
  if (static_cast<int>(potential.size()) != n_points) {
    throw Error("potential has " + std::to_string(potential.size()) +
                " values, grid has " + std::to_string(n_points) + " points");
  }
  const double h = (xmax - xmin) / (n_points - 1);
  const double kinetic = 1.0 / (h * h);
  Matrix m(n_points);
  for (int k = 0; k < n_points; ++k) {
    m(k, k) = kinetic + potential[k];
    if (k > 0) m(k, k - 1) = -0.5 * kinetic;
    if (k + 1 < n_points) m(k, k + 1) = -0.5 * kinetic;
  }
  return HermitianOperator::dense(std::move(m));
}

}  // namespace coopt
