#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "disth2/graph.hpp"
#include "disth2/h2core.hpp"

namespace disth2 {

/// Identical agent dynamics (A, B, C, D, E). The coupling design requires
/// standard form: D'C = 0 and D'D = I.
struct AgentDynamics {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix C;  // p x n
  Matrix D;  // p x m
  Matrix E;  // n x q

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }
  int q() const { return static_cast<int>(E.cols()); }
};

void validate_agent(const AgentDynamics& agent);

/// Closed-loop network under the diffusive protocol u = (L (x) K) x:
///   Atilde = I_N (x) A + L (x) BK
///   Etilde = I_N (x) E
///   Ctilde = W^{1/2} R' (x) C + W^{1/2} R' L (x) DK
struct NetworkRealization {
  Matrix Atilde;  // nN x nN
  Matrix Ctilde;  // pM x nN
  Matrix Etilde;  // nN x qN
  AgentDynamics agent;
  WeightedGraph graph;
  Matrix K;  // m x n
};

/// Mode-i system obtained by diagonalizing the Laplacian:
///   Abar = A + lambda BK, Cbar = sqrt(lambda) C + lambda sqrt(lambda) DK.
struct ModalSystem {
  double lambda = 0.0;
  Matrix Abar;
  Matrix Cbar;
  Matrix Ebar;

  PerformanceTriple triple() const { return {Abar, Cbar, Ebar}; }
};

ModalSystem make_modal_system(const AgentDynamics& agent, double lambda, const Matrix& k);

struct SyncReport {
  bool synchronized = false;
  std::vector<double> lambdas;      // modes 2..N
  std::vector<bool> mode_stable;    // aligned with lambdas
};

struct CostReport {
  double J_global = 0.0;
  std::vector<double> J_modal;               // modes 2..N
  double decomposition_gap = 0.0;            // |J_global - sum(J_modal)|
  bool certified = false;
  std::vector<CostCertificate> per_mode_certificates;
  double gamma = 0.0;
  double sum_trace = 0.0;  // sum_i tr(E' P_i E) over the strict certificates
  double eps = 0.0;        // strictness shift used for the certificates
};

NetworkRealization build_closed_loop(const AgentDynamics& agent, const WeightedGraph& g,
                                     const Matrix& k);

/// Per-mode exact costs J_i for i = 2..N. Throws NotSynchronizing naming the
/// first unstable mode.
std::vector<double> modal_costs(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                                const Matrix& k);

SyncReport check_synchronization(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                                 const Matrix& k);

/// Global H2 cost of the closed loop, computed modally (the consensus mode is
/// unobservable through the disagreement output, so the full-size Lyapunov
/// equation would be singular).
double global_cost(const NetworkRealization& net);

/// Per-mode Lyapunov certificates with strictness shift eps; accepts iff the
/// summed trace beats gamma. Throws NotSynchronizing or GammaInfeasible
/// (payload: the achieved trace sum).
CostReport certify_network(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                           const Matrix& k, double gamma);

/// Independent oracle: Simpson quadrature of the squared Frobenius norm of
/// Ctilde e^{Atilde t} Etilde on the full network triple. The consensus mode
/// carries a zero eigenvalue but is annihilated by Ctilde, so the integrand
/// still decays.
double global_quadrature_cost(const NetworkRealization& net, double horizon, int steps);
double global_quadrature_cost(const NetworkRealization& net);

/// Horizon covering 40 time constants of the slowest certified modal decay.
double default_network_horizon(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                               const Matrix& k);

/// Removes the consensus component (the per-coordinate mean across agents)
/// from each column of a stacked nN x cols matrix. The consensus and
/// disagreement subspaces are both invariant under Atilde and Ctilde
/// annihilates the former, so propagating the projected state leaves zeta
/// unchanged while staying bounded even when A itself is unstable.
Matrix remove_consensus_component(const Matrix& stacked, int agents, int n);

/// Parses an agent file: JSON with matrix fields A, B, C, D, E as nested row
/// arrays.
AgentDynamics load_agent(const std::filesystem::path& path);
AgentDynamics parse_agent_json(const std::string& text, const std::string& origin);

}  // namespace disth2
