#include "disth2/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace disth2 {

const char* method_name(Method m) {
  return m == Method::Thm4 ? "thm4" : "thm5";
}

CouplingRange coupling_range(Method method, double lambda2, double lambda_n) {
  if (!(lambda2 > 0.0) || !(lambda_n >= lambda2) || !std::isfinite(lambda_n)) {
    throw Error(ErrorCode::InvalidSpectrum,
                "coupling_range: need 0 < lambda_2 <= lambda_N");
  }
  const double shared = 2.0 / (lambda2 * lambda2 + lambda2 * lambda_n + lambda_n * lambda_n);
  CouplingRange range;
  if (method == Method::Thm4) {
    range.lower = 0.0;
    range.upper = shared;
    range.upper_inclusive = true;
  } else {
    range.lower = shared;
    range.upper = 2.0 / (lambda_n * lambda_n);
    range.upper_inclusive = false;
  }
  return range;
}

double default_coupling(Method method, const CouplingRange& range) {
  return method == Method::Thm4 ? range.upper : 0.5 * (range.lower + range.upper);
}

ProtocolGain design_protocol(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                             double gamma, Method method, std::optional<double> c_opt) {
  validate_agent(agent);
  if (!is_standard_form(agent.C, agent.D)) {
    throw Error(ErrorCode::NotStandardForm, "design_protocol: requires D'C = 0 and D'D = I");
  }
  if (!(gamma > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "design_protocol: gamma must be > 0");
  }
  if (spec.size() < 2) {
    throw Error(ErrorCode::InvalidSpectrum, "design_protocol: need at least 2 nodes");
  }
  const double lambda2 = spec.lambda2();
  const double lambda_n = spec.lambda_max();
  const double zero_tol = 1e-9 * std::max(1.0, lambda_n);
  if (!(lambda2 > zero_tol)) {
    throw Error(ErrorCode::Disconnected, "design_protocol: graph is not connected");
  }

  const CouplingRange range = coupling_range(method, lambda2, lambda_n);
  double c = default_coupling(method, range);
  if (c_opt) {
    if (!std::isfinite(*c_opt) || !range.contains(*c_opt)) {
      throw Error(ErrorCode::COutOfRange,
                  "design_protocol: c = " + std::to_string(*c_opt) +
                      " outside the admissible " + method_name(method) + " range (" +
                      std::to_string(range.lower) + ", " + std::to_string(range.upper) +
                      (range.upper_inclusive ? "]" : ")"));
    }
    c = *c_opt;
  }

  // The Riccati inequality's quadratic coefficient c^2 lam^3 - 2 c lam is
  // negative on the admissible range; fold it into the input matrix.
  const double anchor = (method == Method::Thm4) ? lambda2 : lambda_n;
  const double coeff = 2.0 * c * anchor - c * c * anchor * anchor * anchor;
  if (!(coeff > 0.0)) {
    throw Error(ErrorCode::COutOfRange,
                "design_protocol: coupling does not yield a negative quadratic coefficient");
  }
  const Matrix bt = std::sqrt(coeff) * agent.B;
  const Matrix q = lambda_n * agent.C.transpose() * agent.C;

  Matrix p;
  try {
    p = solve_riccati(agent.A, bt, q, default_eps(q));
  } catch (const Error& e) {
    throw Error(ErrorCode::RiccatiFailure,
                std::string("design_protocol: Riccati solve failed (") +
                    error_code_name(e.code()) + ": " + e.what() + ")");
  }

  ProtocolGain gain;
  gain.c = c;
  gain.P = p;
  gain.method = method;
  gain.gamma = gamma;
  gain.trace_value = (agent.E.transpose() * p * agent.E).trace();

  const double modes = static_cast<double>(spec.size() - 1);
  const double bound = gamma / modes;
  if (!(bound - gain.trace_value > 1e-12 * bound)) {
    throw Error(ErrorCode::GammaInfeasible,
                "design_protocol: tr(E'PE) = " + std::to_string(gain.trace_value) +
                    " does not beat gamma/(N-1) = " + std::to_string(bound) +
                    "; minimal certifiable gamma at this c is " +
                    std::to_string(modes * gain.trace_value),
                modes * gain.trace_value);
  }
  gain.K = -(c * agent.B.transpose() * p).eval();
  return gain;
}

std::vector<SweepEntry> sweep_feasibility(const AgentDynamics& agent,
                                          const LaplacianSpectrum& spec, double gamma,
                                          Method method, int grid_points) {
  if (grid_points < 2) {
    throw Error(ErrorCode::InvalidInput, "sweep_feasibility: grid_points must be >= 2");
  }
  validate_agent(agent);
  if (!is_standard_form(agent.C, agent.D)) {
    throw Error(ErrorCode::NotStandardForm, "sweep_feasibility: requires D'C = 0 and D'D = I");
  }
  const CouplingRange range = coupling_range(method, spec.lambda2(), spec.lambda_max());

  std::vector<SweepEntry> entries;
  entries.reserve(static_cast<size_t>(grid_points));
  for (int g = 1; g <= grid_points; ++g) {
    SweepEntry entry;
    if (range.upper_inclusive) {
      // (lower, upper]: endpoints at upper, open at lower.
      entry.c = range.lower + (range.upper - range.lower) * g / grid_points;
    } else {
      // open interval: interior points only.
      entry.c = range.lower + (range.upper - range.lower) * g / (grid_points + 1);
    }
    try {
      const ProtocolGain gain = design_protocol(agent, spec, gamma, method, entry.c);
      entry.trace_value = gain.trace_value;
      entry.feasible = true;
    } catch (const Error& e) {
      entry.feasible = false;
      if (e.code() == ErrorCode::GammaInfeasible && e.has_value()) {
        entry.trace_value = e.value() / static_cast<double>(spec.size() - 1);
      } else if (e.code() != ErrorCode::RiccatiFailure) {
        throw;
      }
    }
    entries.push_back(entry);
  }
  return entries;
}

}  // namespace disth2
