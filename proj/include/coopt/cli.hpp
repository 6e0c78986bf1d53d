#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace coopt::cli {

enum class Command { kSolve, kSweep, kQuantum, kNash, kVerify };

enum class InitMode { kUniform, kRandom };

struct RunConfig {
  Command command = Command::kSolve;
  std::string problem;
  std::string hamiltonian;
  std::string profile;
  double alpha = 1.0;
  std::vector<double> alpha_grid;
  std::optional<double> hbar;
  std::optional<double> tol;
  int max_iter = 10000;
  std::optional<double> dt;
  double t_max = 1000.0;
  int states = 1;
  InitMode init = InitMode::kUniform;
  std::uint64_t seed = 0;
  int restarts = 1;
  int trace_every = 1000;
  unsigned threads = 0;
  std::string out;
  std::string trace;
  std::string trace_detail;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

// "a:b:log:N", "a:b:lin:N" or a comma-separated list. Throws coopt::Error.
std::vector<double> parse_alpha_grid(const std::string& text);

// Executes one command. Documents go to config.out (or `out` when empty);
// diagnostics go to `err`. Returns one of the kExit* codes.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv and dispatches to run().
int main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err);

}  // namespace coopt::cli
