#pragma once

#include <map>
#include <ostream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "coopt/continuous_dynamics.hpp"
#include "coopt/discrete_dynamics.hpp"
#include "coopt/equilibrium.hpp"
#include "coopt/model.hpp"
#include "coopt/numerics.hpp"

namespace coopt {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Malformed input file; the message is already anchored to "file:line: ...".
class InputError : public Error {
 public:
  using Error::Error;
};

// Line (1-based) of every value in a syntactically valid JSON document, keyed
// by JSON pointer ("" is the root).
std::map<std::string, int> locate_lines(std::string_view text);

// Problem document -> model. Throws ValidationError with pointer paths for
// structural problems and for every model invariant violation.
GameModel parse_problem(const Json& doc);
HermitianOperator parse_hamiltonian(const Json& doc);
// {"profile": [{"agent": name, "p": [...]}, ...]} in any agent order.
StrategyProfile parse_profile(const Json& doc, const GameModel& model);

// File loaders. Syntax and validation failures become InputError with the
// offending line.
Json load_json(const std::string& path);
GameModel load_problem(const std::string& path);
HermitianOperator load_hamiltonian(const std::string& path);
StrategyProfile load_profile(const std::string& path, const GameModel& model);

Json problem_to_json(const GameModel& model);
Json profile_to_json(const GameModel& model, const StrategyProfile& profile);
Json field_to_json(const GameModel& model, const ExpectedReturnField& field);
Json certificate_to_json(const GameModel& model, const EpsilonCertificate& cert);
Json pure_profiles_to_json(const GameModel& model,
                           const std::vector<PureProfile>& profiles);

// Shortest round-trip decimal form ("%.17g" is not shortest; this is).
std::string format_double(double v);

void write_iteration_trace(std::ostream& out, const IterationTrace& trace);
void write_iteration_detail(std::ostream& out, const GameModel& model,
                            const IterationTrace& trace);
void write_sweep_csv(std::ostream& out, const SweepReport& report);
// `t,agent,action,psi,lambda,residual`; `names` labels the agents.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const std::vector<std::string>& names);

}  // namespace coopt
