#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "disth2/matkernel.hpp"

namespace disth2 {

/// Undirected weighted edge with 1-based node indices.
struct Edge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Connected-or-not simple undirected weighted graph. No self-loops, no
/// duplicate unordered pairs, strictly positive weights.
struct WeightedGraph {
  int node_count = 0;
  std::vector<Edge> edges;
  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Signed incidence factorization L = R W R'. For edge e_k = {i, j}, row
/// max(i,j) holds +1 and row min(i,j) holds -1; column order follows the
/// input edge order.
struct IncidenceForm {
  Matrix R;  // N x M, entries in {-1, 0, +1}
  Matrix W;  // M x M diagonal of edge weights
};

struct LaplacianSpectrum {
  Vector eigenvalues;   // ascending, lambda_1 ~ 0
  Matrix eigenvectors;  // orthogonal U with U' L U = diag(eigenvalues)

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double lambda2() const;     // smallest nonzero eigenvalue (throws if N < 2)
  double lambda_max() const;  // largest eigenvalue
};

/// Throws InvalidInput naming the first structural violation.
void validate(const WeightedGraph& g);

Matrix laplacian(const WeightedGraph& g);
IncidenceForm incidence(const WeightedGraph& g);

/// Spectral decomposition of a Laplacian. Negative round-off eigenvalues
/// above -1e-9 * max(1, lambda_max) are clamped to zero.
LaplacianSpectrum spectrum(const Matrix& l);

/// Exact combinatorial connectivity (disjoint-set union over the edges).
bool is_connected(const WeightedGraph& g);

/// Parses a graph file: JSON with `nodes` (integer) and `edges` (array of
/// [i, j, w] triples, 1-based). Rejects missing/NaN/zero/negative weights.
WeightedGraph load_graph(const std::filesystem::path& path);
WeightedGraph parse_graph_json(const std::string& text, const std::string& origin);

}  // namespace disth2
