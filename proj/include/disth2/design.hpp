#pragma once

#include <optional>
#include <vector>

#include "disth2/network.hpp"

namespace disth2 {

/// The two synthesis recipes. Thm4 anchors the Riccati inequality at
/// lambda_2 with c in (0, 2/(l2^2 + l2*lN + lN^2)]; Thm5 anchors it at
/// lambda_N with c in (2/(l2^2 + l2*lN + lN^2), 2/lN^2).
enum class Method { Thm4, Thm5 };

const char* method_name(Method m);

struct CouplingRange {
  double lower = 0.0;  // always exclusive
  double upper = 0.0;
  bool upper_inclusive = false;

  bool contains(double c) const {
    return c > lower && (upper_inclusive ? c <= upper : c < upper);
  }
};

/// Distributed protocol gain K = -c B'P together with its certificate data.
struct ProtocolGain {
  Matrix K;  // m x n
  double c = 0.0;
  Matrix P;  // n x n PSD Riccati solution
  Method method = Method::Thm4;
  double trace_value = 0.0;  // tr(E'PE), must beat gamma/(N-1)
  double gamma = 0.0;
};

CouplingRange coupling_range(Method method, double lambda2, double lambda_n);

/// Deterministic default: Thm4 takes the inclusive upper endpoint, Thm5 the
/// interval midpoint.
double default_coupling(Method method, const CouplingRange& range);

/// Solves the single n-dimensional Riccati inequality for the chosen c and
/// checks the trace feasibility condition tr(E'PE) < gamma/(N-1).
/// Throws NotStandardForm, COutOfRange, RiccatiFailure, GammaInfeasible
/// (payload: (N-1) * tr(E'PE), the minimal certifiable gamma at this c).
ProtocolGain design_protocol(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                             double gamma, Method method,
                             std::optional<double> c_opt = std::nullopt);

struct SweepEntry {
  double c = 0.0;
  std::optional<double> trace_value;  // empty when the Riccati solve failed
  bool feasible = false;
};

/// Evaluates the design trace on a uniform grid over the admissible c
/// interval. Riccati failures become infeasible entries; the sweep never
/// aborts.
std::vector<SweepEntry> sweep_feasibility(const AgentDynamics& agent,
                                          const LaplacianSpectrum& spec, double gamma,
                                          Method method, int grid_points);

}  // namespace disth2
