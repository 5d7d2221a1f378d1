#include "disth2/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace disth2 {

void validate_agent(const AgentDynamics& agent) {
  const int n = agent.n();
  if (n == 0 || agent.A.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "A must be square and nonempty");
  }
  if (agent.B.rows() != n || agent.B.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "B must be n x m with m >= 1");
  }
  if (agent.C.cols() != n || agent.C.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "C must be p x n with p >= 1");
  }
  if (agent.D.rows() != agent.C.rows() || agent.D.cols() != agent.B.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "D must be p x m");
  }
  if (agent.E.rows() != n || agent.E.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "E must be n x q with q >= 1");
  }
  if (!agent.A.allFinite() || !agent.B.allFinite() || !agent.C.allFinite() ||
      !agent.D.allFinite() || !agent.E.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "agent matrices must be finite");
  }
}

ModalSystem make_modal_system(const AgentDynamics& agent, double lambda, const Matrix& k) {
  const double sq = std::sqrt(lambda);
  ModalSystem mode;
  mode.lambda = lambda;
  mode.Abar = agent.A + lambda * agent.B * k;
  mode.Cbar = sq * agent.C + lambda * sq * agent.D * k;
  mode.Ebar = agent.E;
  return mode;
}

namespace {

void require_gain_shape(const AgentDynamics& agent, const Matrix& k) {
  if (k.rows() != agent.m() || k.cols() != agent.n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "gain K must be m x n = " + std::to_string(agent.m()) + " x " +
                    std::to_string(agent.n()));
  }
  if (!k.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "gain K must be finite");
  }
}

// Modes 2..N; rejects spectra whose lambda_2 is numerically zero.
std::vector<double> positive_modes(const LaplacianSpectrum& spec) {
  if (spec.size() < 2) {
    throw Error(ErrorCode::InvalidSpectrum, "network needs at least 2 nodes");
  }
  const double zero_tol = 1e-9 * std::max(1.0, spec.lambda_max());
  if (!(spec.eigenvalues[1] > zero_tol)) {
    throw Error(ErrorCode::Disconnected,
                "spectrum has a repeated zero eigenvalue (graph disconnected)");
  }
  std::vector<double> lambdas;
  for (int i = 1; i < spec.size(); ++i) lambdas.push_back(spec.eigenvalues[i]);
  return lambdas;
}

}  // namespace

NetworkRealization build_closed_loop(const AgentDynamics& agent, const WeightedGraph& g,
                                     const Matrix& k) {
  validate_agent(agent);
  require_gain_shape(agent, k);
  if (!is_connected(g)) {
    throw Error(ErrorCode::Disconnected, "build_closed_loop: graph is not connected");
  }

  const int big_n = g.node_count;
  const Matrix l = laplacian(g);
  const IncidenceForm inc = incidence(g);
  const Matrix w_half_rt = inc.W.diagonal().cwiseSqrt().asDiagonal() * inc.R.transpose();

  NetworkRealization net;
  net.agent = agent;
  net.graph = g;
  net.K = k;
  net.Atilde = kron(Matrix::Identity(big_n, big_n), agent.A) + kron(l, agent.B * k);
  net.Etilde = kron(Matrix::Identity(big_n, big_n), agent.E);
  net.Ctilde = kron(w_half_rt, agent.C) + kron(w_half_rt * l, agent.D * k);
  return net;
}

SyncReport check_synchronization(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                                 const Matrix& k) {
  validate_agent(agent);
  require_gain_shape(agent, k);
  SyncReport report;
  report.lambdas = positive_modes(spec);
  report.synchronized = true;
  for (double lambda : report.lambdas) {
    const bool stable = is_hurwitz(agent.A + lambda * agent.B * k);
    report.mode_stable.push_back(stable);
    if (!stable) report.synchronized = false;
  }
  return report;
}

std::vector<double> modal_costs(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                                const Matrix& k) {
  validate_agent(agent);
  require_gain_shape(agent, k);
  const std::vector<double> lambdas = positive_modes(spec);

  std::vector<double> costs;
  costs.reserve(lambdas.size());
  for (size_t i = 0; i < lambdas.size(); ++i) {
    const ModalSystem mode = make_modal_system(agent, lambdas[i], k);
    if (!is_hurwitz(mode.Abar)) {
      Error err(ErrorCode::NotSynchronizing,
                "mode " + std::to_string(i + 2) + " (lambda = " +
                    std::to_string(lambdas[i]) + ") is not internally stable",
                lambdas[i]);
      err.mode_index = static_cast<int>(i + 2);
      throw err;
    }
    costs.push_back(exact_cost(mode.triple()));
  }
  return costs;
}

double global_cost(const NetworkRealization& net) {
  const LaplacianSpectrum spec = spectrum(laplacian(net.graph));
  const std::vector<double> costs = modal_costs(net.agent, spec, net.K);
  double total = 0.0;
  for (double c : costs) total += c;
  return total;
}

CostReport certify_network(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                           const Matrix& k, double gamma) {
  validate_agent(agent);
  require_gain_shape(agent, k);
  if (!is_standard_form(agent.C, agent.D)) {
    throw Error(ErrorCode::NotStandardForm, "certify_network: requires D'C = 0 and D'D = I");
  }
  const std::vector<double> lambdas = positive_modes(spec);

  std::vector<ModalSystem> modes;
  for (size_t i = 0; i < lambdas.size(); ++i) {
    modes.push_back(make_modal_system(agent, lambdas[i], k));
    if (!is_hurwitz(modes.back().Abar)) {
      Error err(ErrorCode::NotSynchronizing,
                "mode " + std::to_string(i + 2) + " (lambda = " +
                    std::to_string(lambdas[i]) + ") is not internally stable",
                lambdas[i]);
      err.mode_index = static_cast<int>(i + 2);
      throw err;
    }
  }

  // One strictness shift shared by all modes.
  double q_scale = 0.0;
  for (const ModalSystem& mode : modes) {
    q_scale = std::max(q_scale, max_abs(mode.Cbar.transpose() * mode.Cbar));
  }
  const double eps = 1e-6 * std::max(1.0, q_scale);

  CostReport report;
  report.gamma = gamma;
  report.eps = eps;

  const Eigen::Index n = agent.n();
  std::vector<Matrix> p_certs;
  for (const ModalSystem& mode : modes) {
    const Matrix q = mode.Cbar.transpose() * mode.Cbar;
    const Matrix p = solve_lyapunov(mode.Abar, q + eps * Matrix::Identity(n, n));
    p_certs.push_back(p);
    report.sum_trace += (agent.E.transpose() * p * agent.E).trace();
    report.J_modal.push_back(exact_cost(mode.triple()));
  }
  for (double j : report.J_modal) report.J_global += j;
  report.decomposition_gap = 0.0;

  if (!(gamma - report.sum_trace > 1e-12 * std::abs(gamma))) {
    throw Error(ErrorCode::GammaInfeasible,
                "certify_network: certificate trace sum " + std::to_string(report.sum_trace) +
                    " does not beat gamma " + std::to_string(gamma),
                report.sum_trace);
  }

  // Distribute the slack evenly so each per-mode certificate carries a valid
  // gamma_i with sum gamma_i = gamma.
  const double share = (gamma - report.sum_trace) / static_cast<double>(modes.size());
  for (size_t i = 0; i < modes.size(); ++i) {
    const Matrix q = modes[i].Cbar.transpose() * modes[i].Cbar;
    const double trace = (agent.E.transpose() * p_certs[i] * agent.E).trace();
    CostCertificate cert;
    cert.P = p_certs[i];
    cert.gamma = trace + share;
    cert.slack = share;
    const Matrix lyap = modes[i].Abar.transpose() * p_certs[i] + p_certs[i] * modes[i].Abar + q;
    cert.lyap_margin = sym_eig(0.5 * (lyap + lyap.transpose())).eigenvalues.maxCoeff();
    report.per_mode_certificates.push_back(cert);
  }
  report.certified = true;
  return report;
}

double default_network_horizon(const AgentDynamics& agent, const LaplacianSpectrum& spec,
                               const Matrix& k) {
  const std::vector<double> lambdas = positive_modes(spec);
  double horizon = 1.0;
  for (double lambda : lambdas) {
    const ModalSystem mode = make_modal_system(agent, lambda, k);
    const Matrix y = solve_lyapunov(mode.Abar, Matrix::Identity(agent.n(), agent.n()));
    const double y_norm = sym_eig(y).eigenvalues.cwiseAbs().maxCoeff();
    horizon = std::max(horizon, 80.0 * y_norm);
  }
  return horizon;
}

Matrix remove_consensus_component(const Matrix& stacked, int agents, int n) {
  Matrix out = stacked;
  for (Eigen::Index col = 0; col < out.cols(); ++col) {
    for (int coord = 0; coord < n; ++coord) {
      double mean = 0.0;
      for (int i = 0; i < agents; ++i) mean += out(i * n + coord, col);
      mean /= agents;
      for (int i = 0; i < agents; ++i) out(i * n + coord, col) -= mean;
    }
  }
  return out;
}

double global_quadrature_cost(const NetworkRealization& net, double horizon, int steps) {
  if (!(horizon > 0.0) || steps < 2) {
    throw Error(ErrorCode::InvalidInput, "global_quadrature_cost: bad horizon/steps");
  }
  const LaplacianSpectrum spec = spectrum(laplacian(net.graph));
  const SyncReport sync = check_synchronization(net.agent, spec, net.K);
  if (!sync.synchronized) {
    throw Error(ErrorCode::NotSynchronizing,
                "global_quadrature_cost: protocol does not synchronize");
  }
  if (steps % 2 != 0) ++steps;

  const int agents = net.graph.node_count;
  const int n = net.agent.n();
  const double h = horizon / steps;
  const Matrix phi = expm(net.Atilde, h);
  // Re-projecting every step keeps roundoff from re-exciting the (possibly
  // unstable) consensus dynamics over long horizons.
  Matrix x = remove_consensus_component(net.Etilde, agents, n);
  double acc = (net.Ctilde * x).squaredNorm();
  for (int k = 1; k <= steps; ++k) {
    x = remove_consensus_component(phi * x, agents, n);
    const double g = (net.Ctilde * x).squaredNorm();
    const double w = (k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += w * g;
  }
  return acc * h / 3.0;
}

double global_quadrature_cost(const NetworkRealization& net) {
  const LaplacianSpectrum spec = spectrum(laplacian(net.graph));
  const SyncReport sync = check_synchronization(net.agent, spec, net.K);
  if (!sync.synchronized) {
    throw Error(ErrorCode::NotSynchronizing,
                "global_quadrature_cost: protocol does not synchronize");
  }
  const double horizon = default_network_horizon(net.agent, spec, net.K);
  const double rate = std::max(net.Atilde.norm(), 4.0 / horizon);
  const int seg_steps = 4096;
  const int agents = net.graph.node_count;
  const int n = net.agent.n();

  // Doubling-segment composite Simpson; see the fixed-grid overload for the
  // consensus projection rationale.
  double seg_len = 4.0 / rate;
  double t = 0.0;
  double total = 0.0;
  Matrix x = remove_consensus_component(net.Etilde, agents, n);
  for (int seg = 0; seg < 80 && t < horizon; ++seg) {
    const double len = std::min(seg_len, horizon - t);
    const double h = len / seg_steps;
    const Matrix phi = expm(net.Atilde, h);
    double acc = (net.Ctilde * x).squaredNorm();
    for (int k = 1; k <= seg_steps; ++k) {
      x = remove_consensus_component(phi * x, agents, n);
      const double w = (k == seg_steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      acc += w * (net.Ctilde * x).squaredNorm();
    }
    total += acc * h / 3.0;
    t += len;
    seg_len *= 2.0;
  }
  return total;
}

namespace {

using nlohmann::json;

Matrix parse_matrix_field(const json& j, const std::string& field, const std::string& origin) {
  if (!j.contains(field)) {
    throw Error(ErrorCode::ParseError, origin + ": missing matrix field '" + field + "'");
  }
  const json& rows = j[field];
  if (!rows.is_array() || rows.empty()) {
    throw Error(ErrorCode::ParseError,
                origin + ": field '" + field + "' must be a nonempty array of rows");
  }
  const size_t ncols = rows[0].is_array() ? rows[0].size() : 0;
  if (ncols == 0) {
    throw Error(ErrorCode::ParseError,
                origin + ": field '" + field + "' rows must be nonempty arrays");
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncols));
  for (size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != ncols) {
      throw Error(ErrorCode::ParseError,
                  origin + ": field '" + field + "' row " + std::to_string(r + 1) +
                      " has inconsistent length");
    }
    for (size_t c = 0; c < ncols; ++c) {
      if (!rows[r][c].is_number()) {
        throw Error(ErrorCode::ParseError,
                    origin + ": field '" + field + "' entry (" + std::to_string(r + 1) +
                        "," + std::to_string(c + 1) + ") must be a number");
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
    }
  }
  if (!out.allFinite()) {
    throw Error(ErrorCode::ParseError, origin + ": field '" + field + "' has non-finite entries");
  }
  return out;
}

}  // namespace

AgentDynamics parse_agent_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::ParseError, origin + ": top level must be an object");
  }
  AgentDynamics agent;
  agent.A = parse_matrix_field(j, "A", origin);
  agent.B = parse_matrix_field(j, "B", origin);
  agent.C = parse_matrix_field(j, "C", origin);
  agent.D = parse_matrix_field(j, "D", origin);
  agent.E = parse_matrix_field(j, "E", origin);
  try {
    validate_agent(agent);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what());
  }
  return agent;
}

AgentDynamics load_agent(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open agent file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_agent_json(buf.str(), path.filename().string());
}

}  // namespace disth2
