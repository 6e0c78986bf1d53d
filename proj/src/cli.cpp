#include "coopt/cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "coopt/continuous_dynamics.hpp"
#include "coopt/discrete_dynamics.hpp"
#include "coopt/equilibrium.hpp"
#include "coopt/io.hpp"
#include "coopt/rng.hpp"

namespace coopt::cli {
namespace {

constexpr double kOracleMatchTolerance = 1e-6;

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream_ = &fallback;
      return;
    }
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw Error(path + ": cannot open for writing");
    stream_ = &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

void emit(const Json& doc, const std::string& path, std::ostream& fallback) {
  Sink sink(path, fallback);
  *sink << doc.dump(2) << '\n';
}

GameModel load_model(const RunConfig& config) {
  if (config.problem.empty()) throw InputError("--problem is required");
  GameModel model = load_problem(config.problem);
  if (config.hbar) {
    model.hbar = *config.hbar;
    model = validate(std::move(model));
  }
  return model;
}

Json header(const char* command) {
  return {{"schema_version", kSchemaVersion}, {"command", command}};
}

int solve(const RunConfig& config, std::ostream& out) {
  const GameModel model = load_model(config);
  IterationOptions options;
  options.alpha = config.alpha;
  options.tol = config.tol.value_or(kDefaultTolerance);
  options.max_iter = config.max_iter;
  if (config.init == InitMode::kRandom) {
    options.init = random_profile(model, config.seed);
  }
  const bool tracing = !config.trace.empty() || !config.trace_detail.empty();
  IterationTrace trace;
  const auto result =
      iterate_to_fixed_point(model, options, tracing ? &trace : nullptr);

  Json doc = header("solve");
  doc["alpha"] = options.alpha;
  doc["hbar"] = model.hbar;
  doc["tol"] = options.tol;
  doc["max_iter"] = options.max_iter;
  doc["init"] = config.init == InitMode::kRandom ? "random" : "uniform";
  if (config.init == InitMode::kRandom) doc["seed"] = config.seed;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  doc["max_change"] = result.max_change;
  doc["profile"] = profile_to_json(model, result.profile);
  doc["psi"] = field_to_json(model, result.field);
  doc["welfare"] = social_welfare(model, result.profile);
  if (model.mode == Mode::kUtility) {
    doc["certificate"] =
        certificate_to_json(model, epsilon_of_profile(model, result.profile));
  } else {
    doc["decoded"] = decode_argmax(result.profile);
    doc["decoded_energy"] = total_energy(model, decode_argmax(result.profile));
  }
  emit(doc, config.out, out);
  if (!config.trace.empty()) {
    Sink sink(config.trace, out);
    write_iteration_trace(*sink, trace);
  }
  if (!config.trace_detail.empty()) {
    Sink sink(config.trace_detail, out);
    write_iteration_detail(*sink, model, trace);
  }
  return result.converged ? kExitOk : kExitNotConverged;
}

int sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const GameModel model = load_model(config);
  SweepOptions options;
  options.alpha_grid =
      config.alpha_grid.empty() ? std::vector<double>{config.alpha} : config.alpha_grid;
  options.restarts = config.restarts;
  options.base_seed = config.seed;
  options.tol = config.tol.value_or(kDefaultTolerance);
  options.max_iter = config.max_iter;
  options.threads = config.threads;
  const auto report = alpha_sweep(model, options);
  {
    Sink sink(config.out, out);
    write_sweep_csv(*sink, report);
  }
  bool all = true;
  for (const auto& row : report.rows) {
    if (!row.error.empty()) {
      err << "warning: alpha=" << format_double(row.alpha) << " seed=" << row.seed
          << ": " << row.error << '\n';
    }
    all = all && row.converged;
  }
  return all ? kExitOk : kExitNotConverged;
}

Vector initial_vector(std::size_t n, const RunConfig& config) {
  Vector psi(n, 1.0 / std::sqrt(static_cast<double>(n)));
  if (config.init == InitMode::kRandom) {
    SplitMix64 rng(config.seed);
    for (double& v : psi) v = rng.uniform(-1.0, 1.0);
  }
  return psi;
}

Json state_to_json(int index, const AgentStationarity& st,
                   const StationaryReport& report, const Vector& psi) {
  Json s;
  s["index"] = index;
  s["lambda"] = st.lambda;
  s["residual"] = st.residual;
  s["converged"] = report.converged;
  s["evolution_time"] = report.evolution_time;
  s["steps"] = report.steps;
  s["matched_eigenvalue_index"] =
      st.matched_eigenvalue_index ? Json(*st.matched_eigenvalue_index) : Json();
  s["matched_eigenvalue"] =
      st.matched_eigenvalue ? Json(*st.matched_eigenvalue) : Json();
  s["psi"] = psi;
  return s;
}

int quantum_linear(const RunConfig& config, std::ostream& out) {
  const HermitianOperator h = load_hamiltonian(config.hamiltonian);
  EvolutionOptions options;
  options.hbar = config.hbar.value_or(kDefaultHbar);
  options.dt = config.dt;
  options.t_max = config.t_max;
  options.tol = config.tol.value_or(kDefaultStationarityTol);
  options.record_every = config.trace.empty() ? 0 : config.trace_every;
  auto results =
      lowest_states(h, initial_vector(h.dimension(), config), config.states, options);

  std::optional<EigenDecomposition> oracle;
  if (h.dimension() <= kMaxJacobiDimension) oracle = jacobi_eigen(h);

  Json doc = header("quantum");
  doc["source"] = "hamiltonian";
  doc["dimension"] = h.dimension();
  doc["hbar"] = options.hbar;
  doc["dt"] = options.dt.value_or(
      h.max_abs_diagonal() > 0.0 ? 0.01 * options.hbar / h.max_abs_diagonal()
                                 : 0.01 * options.hbar);
  doc["t_max"] = options.t_max;
  doc["tol"] = options.tol;
  bool all = true;
  Json states = Json::array();
  for (std::size_t s = 0; s < results.size(); ++s) {
    auto& entry = results[s].report.agents.front();
    if (oracle) match_eigenvalues(entry, *oracle, kOracleMatchTolerance);
    all = all && results[s].report.converged;
    states.push_back(state_to_json(static_cast<int>(s), entry, results[s].report,
                                   results[s].final_state.front()));
  }
  doc["converged"] = all;
  doc["states"] = states;
  if (oracle) {
    const std::size_t k = std::min<std::size_t>(oracle->eigenvalues.size(),
                                                results.size());
    doc["oracle_eigenvalues"] = Vector(oracle->eigenvalues.begin(),
                                       oracle->eigenvalues.begin() + k);
  }
  emit(doc, config.out, out);

  if (!config.trace.empty()) {
    Sink sink(config.trace, out);
    Trajectory merged;
    std::vector<std::string> names;
    // One label per state so every row of the merged file is attributable.
    for (std::size_t s = 0; s < results.size(); ++s) {
      for (auto point : results[s].trajectory) {
        WaveState state(results.size());
        std::vector<StationarityResult> st(results.size());
        state[s] = point.state.front();
        st[s] = point.stationarity.front();
        point.state = std::move(state);
        point.stationarity = std::move(st);
        merged.push_back(std::move(point));
      }
      names.push_back("state" + std::to_string(s));
    }
    write_trajectory_csv(*sink, merged, names);
  }
  return all ? kExitOk : kExitNotConverged;
}

int quantum_coupled(const RunConfig& config, std::ostream& out) {
  const GameModel model = load_model(config);
  EvolutionOptions options;
  options.hbar = model.hbar;
  options.dt = config.dt;
  options.t_max = config.t_max;
  options.tol = config.tol.value_or(kDefaultStationarityTol);
  options.record_every = config.trace.empty() ? 0 : config.trace_every;
  WaveState state0 = uniform_wave_state(model);
  if (config.init == InitMode::kRandom) {
    SplitMix64 rng(config.seed);
    for (auto& psi : state0) {
      for (double& v : psi) v = rng.uniform_positive();
    }
  }
  auto result = evolve_coupled(model, state0, options);

  Json doc = header("quantum");
  doc["source"] = "problem";
  doc["hbar"] = options.hbar;
  doc["t_max"] = options.t_max;
  doc["tol"] = options.tol;
  doc["converged"] = result.report.converged;
  Json states = Json::array();
  for (std::size_t a = 0; a < model.num_agents(); ++a) {
    auto& entry = result.report.agents[a];
    const auto h = effective_hamiltonian(model, result.final_state, a);
    match_eigenvalues(entry, jacobi_eigen(h), kOracleMatchTolerance);
    Json s = state_to_json(static_cast<int>(a), entry, result.report,
                           result.final_state[a]);
    s["agent"] = model.agents[a].name;
    states.push_back(s);
  }
  doc["states"] = states;
  emit(doc, config.out, out);

  if (!config.trace.empty()) {
    Sink sink(config.trace, out);
    std::vector<std::string> names;
    for (const auto& agent : model.agents) names.push_back(agent.name);
    write_trajectory_csv(*sink, result.trajectory, names);
  }
  return result.report.converged ? kExitOk : kExitNotConverged;
}

int quantum(const RunConfig& config, std::ostream& out) {
  if (config.hamiltonian.empty() == config.problem.empty()) {
    throw InputError("quantum needs exactly one of --hamiltonian or --problem");
  }
  return config.hamiltonian.empty() ? quantum_coupled(config, out)
                                    : quantum_linear(config, out);
}

int nash(const RunConfig& config, std::ostream& out) {
  const GameModel model = to_utility_model(load_model(config));
  Json doc = header("nash");
  doc.update(pure_profiles_to_json(model, enumerate_pure_nash(model)));
  emit(doc, config.out, out);
  return kExitOk;
}

int verify(const RunConfig& config, std::ostream& out) {
  const GameModel model = to_utility_model(load_model(config));
  if (config.profile.empty()) throw InputError("--profile is required");
  const StrategyProfile profile = load_profile(config.profile, model);
  Json doc = header("verify");
  doc["profile"] = profile_to_json(model, profile);
  doc["certificate"] = certificate_to_json(model, epsilon_of_profile(model, profile));
  doc["welfare"] = social_welfare(model, profile);
  emit(doc, config.out, out);
  return kExitOk;
}

}  // namespace

std::vector<double> parse_alpha_grid(const std::string& text) {
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, sep);) parts.push_back(part);

  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) {
      throw Error("--alpha-grid: '" + s + "' is not a number");
    }
    return v;
  };

  std::vector<double> grid;
  if (sep == ',') {
    for (const auto& p : parts) grid.push_back(number(p));
  } else {
    if (parts.size() != 4 || (parts[2] != "log" && parts[2] != "lin")) {
      throw Error("--alpha-grid must be a:b:log:N, a:b:lin:N or a comma list");
    }
    const double a = number(parts[0]);
    const double b = number(parts[1]);
    const double nd = number(parts[3]);
    if (nd < 1 || nd != std::floor(nd)) {
      throw Error("--alpha-grid: N must be a positive integer");
    }
    const int n = static_cast<int>(nd);
    const bool log = parts[2] == "log";
    if (log && !(a > 0.0 && b > 0.0)) {
      throw Error("--alpha-grid: log grids need positive endpoints");
    }
    for (int k = 0; k < n; ++k) {
      if (n == 1) {
        grid.push_back(a);
      } else if (k == n - 1) {
        grid.push_back(b);
      } else if (log) {
        grid.push_back(a * std::pow(b / a, static_cast<double>(k) / (n - 1)));
      } else {
        grid.push_back(a + (b - a) * k / (n - 1));
      }
    }
  }
  for (double v : grid) {
    if (!(v > 0.0)) throw Error("--alpha-grid values must be > 0");
  }
  return grid;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::kSolve:
        return solve(config, out);
      case Command::kSweep:
        return sweep(config, out, err);
      case Command::kQuantum:
        return quantum(config, out);
      case Command::kNash:
        return nash(config, out);
      case Command::kVerify:
        return verify(config, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

int main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Cooperative-optimization dynamics: expected-return iteration, "
               "imaginary-time evolution and equilibrium certificates"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  std::string grid;
  std::string init = "uniform";
  double hbar = 0.0;
  double tol = 0.0;
  double dt = 0.0;

  app.add_option("--problem", config.problem, "Problem file (JSON)");
  app.add_option("--hamiltonian", config.hamiltonian, "Hamiltonian file (JSON)");
  app.add_option("--profile", config.profile, "Strategy profile file (JSON)");
  app.add_option("--alpha", config.alpha, "Compromise exponent alpha")
      ->check(CLI::PositiveNumber);
  app.add_option("--alpha-grid", grid, "a:b:log:N | a:b:lin:N | comma list");
  auto* hbar_opt = app.add_option("--hbar", hbar, "Override hbar")
                       ->check(CLI::PositiveNumber);
  auto* tol_opt = app.add_option("--tol", tol, "Convergence tolerance")
                      ->check(CLI::PositiveNumber);
  app.add_option("--max-iter", config.max_iter, "Iteration budget")
      ->check(CLI::PositiveNumber);
  auto* dt_opt =
      app.add_option("--dt", dt, "Integrator step")->check(CLI::PositiveNumber);
  app.add_option("--t-max", config.t_max, "Evolution time budget")
      ->check(CLI::PositiveNumber);
  app.add_option("--states", config.states, "Number of lowest states (quantum)")
      ->check(CLI::PositiveNumber);
  app.add_option("--init", init, "Initial state")
      ->check(CLI::IsMember({"uniform", "random"}));
  app.add_option("--seed", config.seed, "Seed for random initial states");
  app.add_option("--restarts", config.restarts, "Restarts per alpha (sweep)")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", config.threads, "Sweep worker threads (0 = auto)");
  app.add_option("--trace-every", config.trace_every,
                 "Trajectory sampling stride in steps (quantum)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", config.out, "Result path (default stdout)");
  app.add_option("--trace", config.trace, "Trace CSV path");
  app.add_option("--trace-detail", config.trace_detail,
                 "Per-action trace CSV path (solve)");

  auto* solve_cmd = app.add_subcommand("solve", "Iterate to a fixed point");
  auto* sweep_cmd = app.add_subcommand("sweep", "Alpha sweep experiment");
  auto* quantum_cmd =
      app.add_subcommand("quantum", "Imaginary-time evolution to stationary states");
  auto* nash_cmd = app.add_subcommand("nash", "Enumerate pure Nash equilibria");
  auto* verify_cmd =
      app.add_subcommand("verify", "Epsilon certificate of a strategy profile");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  if (solve_cmd->parsed()) config.command = Command::kSolve;
  if (sweep_cmd->parsed()) config.command = Command::kSweep;
  if (quantum_cmd->parsed()) config.command = Command::kQuantum;
  if (nash_cmd->parsed()) config.command = Command::kNash;
  if (verify_cmd->parsed()) config.command = Command::kVerify;
  if (hbar_opt->count()) config.hbar = hbar;
  if (tol_opt->count()) config.tol = tol;
  if (dt_opt->count()) config.dt = dt;
  config.init = init == "random" ? InitMode::kRandom : InitMode::kUniform;
  if (!grid.empty()) {
    try {
      config.alpha_grid = parse_alpha_grid(grid);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitInputError;
    }
  }
  return run(config, out, err);
}

}  // namespace coopt::cli
