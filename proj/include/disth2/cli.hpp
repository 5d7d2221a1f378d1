#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "disth2/design.hpp"
#include "disth2/sim.hpp"

namespace disth2 {

struct SimulationConfig {
  double t_final = 0.0;
  double dt = 0.0;
  std::optional<Vector> x0;  // defaults to zero
  DisturbanceSpec disturbance;
};

/// One config file drives every command; flags only select the command and
/// output paths.
struct ProblemConfig {
  AgentDynamics agent;
  WeightedGraph graph;
  std::optional<double> gamma;
  std::optional<Method> method;
  std::optional<double> c;
  std::optional<Matrix> gain;  // explicit K, used by simulate (and as a verify fallback)
  std::optional<SimulationConfig> simulation;
};

ProblemConfig load_config(const std::filesystem::path& path);

/// Reads a gain file: any JSON object with a top-level "K" matrix field
/// (design reports qualify).
Matrix load_gain(const std::filesystem::path& path);

/// Exit codes shared by all commands:
/// 0 ok, 1 input error, 2 disconnected graph, 3 infeasible/not-synchronizing,
/// 4 not standard form, 5 oracle disagreement.
int exit_code_for(ErrorCode code);

struct CommandResult {
  int exit_code = 0;
  std::string report;  // JSON document
  std::string csv;     // simulate only: trajectory export
};

CommandResult run_spectrum(const ProblemConfig& config);
CommandResult run_design(const ProblemConfig& config);
CommandResult run_verify(const ProblemConfig& config, const Matrix& k);
CommandResult run_simulate(const ProblemConfig& config);

/// Relative tolerance for the verify command's Lyapunov-vs-quadrature
/// cross-check; disagreement beyond it exits 5.
inline constexpr double kOracleRelTol = 1e-3;

}  // namespace disth2
