// Shared test utilities: deterministic random instance generators and
// reference oracles kept independent of the library's solver paths (the
// oracles lean on Eigen's general eigensolver and direct series/RK4
// integration, which the library deliberately avoids).
#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "disth2/graph.hpp"
#include "disth2/h2core.hpp"
#include "disth2/network.hpp"

namespace testsupport {

using disth2::Matrix;
using disth2::Vector;

inline Matrix random_matrix(std::mt19937& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

/// Largest real part of the (possibly complex) spectrum, by Eigen's general
/// eigensolver -- the reference the library's Lyapunov-based test is checked
/// against.
inline double max_real_eigenvalue(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    worst = std::max(worst, es.eigenvalues()[i].real());
  }
  return worst;
}

inline Matrix random_hurwitz(std::mt19937& rng, int n, double min_margin = 0.3) {
  std::uniform_real_distribution<double> margin(min_margin, min_margin + 1.0);
  Matrix a = random_matrix(rng, n, n);
  return a - (max_real_eigenvalue(a) + margin(rng)) * Matrix::Identity(n, n);
}

inline disth2::PerformanceTriple random_stable_triple(std::mt19937& rng, int n, int p, int q) {
  disth2::PerformanceTriple sys;
  sys.Abar = random_hurwitz(rng, n);
  sys.Cbar = random_matrix(rng, p, n);
  do {
    sys.Ebar = random_matrix(rng, n, q);
  } while (sys.Ebar.norm() < 0.1);
  return sys;
}

/// Canonical standard-form agent: m = q = 1, p = 2, D = (0, 1)', C's second
/// row zero, so D'C = 0 and D'D = 1 hold exactly.
inline disth2::AgentDynamics random_standard_agent(std::mt19937& rng, int n) {
  disth2::AgentDynamics agent;
  agent.A = random_matrix(rng, n, n);
  do {
    agent.B = random_matrix(rng, n, 1);
  } while (agent.B.norm() < 0.3);
  agent.C = Matrix::Zero(2, n);
  do {
    agent.C.row(0) = random_matrix(rng, 1, n);
  } while (agent.C.norm() < 0.3);
  agent.D = Matrix::Zero(2, 1);
  agent.D(1, 0) = 1.0;
  do {
    agent.E = random_matrix(rng, n, 1);
  } while (agent.E.norm() < 0.3);
  return agent;
}

inline disth2::WeightedGraph random_connected_graph(std::mt19937& rng, int nodes) {
  std::uniform_real_distribution<double> weight(0.2, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  disth2::WeightedGraph g;
  g.node_count = nodes;
  for (int v = 2; v <= nodes; ++v) {
    std::uniform_int_distribution<int> parent(1, v - 1);
    g.edges.push_back({parent(rng), v, weight(rng)});
  }
  for (int i = 1; i <= nodes; ++i) {
    for (int j = i + 1; j <= nodes; ++j) {
      const bool in_tree = [&] {
        for (const auto& e : g.edges) {
          if ((e.i == i && e.j == j) || (e.i == j && e.j == i)) return true;
        }
        return false;
      }();
      if (!in_tree && coin(rng) < 0.25) g.edges.push_back({i, j, weight(rng)});
    }
  }
  return g;
}

inline disth2::WeightedGraph random_disconnected_graph(std::mt19937& rng, int nodes) {
  std::uniform_real_distribution<double> weight(0.2, 2.0);
  std::uniform_int_distribution<int> cut_dist(1, nodes - 1);
  const int cut = cut_dist(rng);  // nodes 1..cut and cut+1..nodes stay separate
  disth2::WeightedGraph g;
  g.node_count = nodes;
  for (int v = 2; v <= cut; ++v) {
    std::uniform_int_distribution<int> parent(1, v - 1);
    g.edges.push_back({parent(rng), v, weight(rng)});
  }
  for (int v = cut + 2; v <= nodes; ++v) {
    std::uniform_int_distribution<int> parent(cut + 1, v - 1);
    g.edges.push_back({parent(rng), v, weight(rng)});
  }
  return g;
}

/// Direct Taylor-series matrix exponential accumulated in long double.
inline Matrix taylor_expm(const Matrix& a, double t) {
  const Eigen::Index n = a.rows();
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  LMatrix m = (a * t).cast<long double>();
  LMatrix term = LMatrix::Identity(n, n);
  LMatrix sum = term;
  for (int k = 1; k <= 300; ++k) {
    term = (term * m / static_cast<long double>(k)).eval();
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-22L * sum.cwiseAbs().maxCoeff()) break;
  }
  return sum.cast<double>();
}

/// Fourth-order Runge-Kutta propagation of Xdot = A X from I over [0, t],
/// with step doubling until successive refinements agree.
inline Matrix rk4_expm(const Matrix& a, double t, double tol = 1e-11) {
  const Eigen::Index n = a.rows();
  auto propagate = [&](int steps) {
    const double h = t / steps;
    Matrix x = Matrix::Identity(n, n);
    for (int s = 0; s < steps; ++s) {
      const Matrix k1 = a * x;
      const Matrix k2 = a * (x + 0.5 * h * k1);
      const Matrix k3 = a * (x + 0.5 * h * k2);
      const Matrix k4 = a * (x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
  };
  int steps = 64;
  Matrix coarse = propagate(steps);
  for (int round = 0; round < 12; ++round) {
    steps *= 2;
    const Matrix fine = propagate(steps);
    if ((fine - coarse).cwiseAbs().maxCoeff() <= tol) return fine;
    coarse = fine;
  }
  return coarse;
}

}  // namespace testsupport
