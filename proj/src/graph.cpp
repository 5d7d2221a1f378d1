#include "disth2/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace disth2 {

double LaplacianSpectrum::lambda2() const {
  if (size() < 2) {
    throw Error(ErrorCode::InvalidSpectrum, "lambda_2 requires at least 2 nodes");
  }
  return eigenvalues[1];
}

double LaplacianSpectrum::lambda_max() const {
  if (size() < 1) {
    throw Error(ErrorCode::InvalidSpectrum, "empty spectrum");
  }
  return eigenvalues[size() - 1];
}

void validate(const WeightedGraph& g) {
  if (g.node_count < 1) {
    throw Error(ErrorCode::InvalidInput, "graph must have at least one node");
  }
  std::set<std::pair<int, int>> seen;
  for (size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    const std::string where = "edge " + std::to_string(k + 1);
    if (e.i < 1 || e.i > g.node_count || e.j < 1 || e.j > g.node_count) {
      throw Error(ErrorCode::InvalidInput, where + ": node index out of range 1.." +
                                               std::to_string(g.node_count));
    }
    if (e.i == e.j) {
      throw Error(ErrorCode::InvalidInput, where + ": self-loop is not allowed");
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::InvalidInput, where + ": weight must be finite and > 0");
    }
    auto key = std::minmax(e.i, e.j);
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::InvalidInput,
                  where + ": duplicate unordered pair {" + std::to_string(key.first) +
                      "," + std::to_string(key.second) + "}");
    }
  }
}

Matrix laplacian(const WeightedGraph& g) {
  validate(g);
  Matrix l = Matrix::Zero(g.node_count, g.node_count);
  for (const Edge& e : g.edges) {
    const int i = e.i - 1;
    const int j = e.j - 1;
    l(i, i) += e.weight;
    l(j, j) += e.weight;
    l(i, j) -= e.weight;
    l(j, i) -= e.weight;
  }
  return l;
}

IncidenceForm incidence(const WeightedGraph& g) {
  validate(g);
  const int m = g.edge_count();
  IncidenceForm out;
  out.R = Matrix::Zero(g.node_count, m);
  out.W = Matrix::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    const Edge& e = g.edges[static_cast<size_t>(k)];
    out.R(std::max(e.i, e.j) - 1, k) = 1.0;
    out.R(std::min(e.i, e.j) - 1, k) = -1.0;
    out.W(k, k) = e.weight;
  }
  return out;
}

LaplacianSpectrum spectrum(const Matrix& l) {
  if (l.rows() != l.cols() || l.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "spectrum: L must be square");
  }
  if (!is_symmetric(l, 1e-12 * std::max(1.0, max_abs(l)))) {
    throw Error(ErrorCode::NonSymmetric, "spectrum: L is not symmetric");
  }
  SymEig se = sym_eig(l);

  LaplacianSpectrum out;
  out.eigenvalues = se.eigenvalues;
  out.eigenvectors = se.eigenvectors;

  const double lambda_n = out.eigenvalues[out.size() - 1];
  const double zero_tol = 1e-9 * std::max(1.0, lambda_n);
  for (int k = 0; k < out.size(); ++k) {
    if (out.eigenvalues[k] < 0.0 && out.eigenvalues[k] >= -zero_tol) {
      out.eigenvalues[k] = 0.0;
    }
  }

  const Matrix recon = out.eigenvectors * out.eigenvalues.asDiagonal() *
                       out.eigenvectors.transpose();
  if (max_abs(recon - l) > 1e-9 * std::max(1.0, lambda_n)) {
    throw Error(ErrorCode::NoConvergence, "spectrum: reconstruction residual too large");
  }
  return out;
}

bool is_connected(const WeightedGraph& g) {
  validate(g);
  std::vector<int> parent(static_cast<size_t>(g.node_count));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  int components = g.node_count;
  for (const Edge& e : g.edges) {
    const int a = find(e.i - 1);
    const int b = find(e.j - 1);
    if (a != b) {
      parent[static_cast<size_t>(a)] = b;
      --components;
    }
  }
  return components == 1;
}

namespace {

using nlohmann::json;

int require_int(const json& j, const std::string& field, const std::string& origin) {
  if (!j.contains(field) || !j[field].is_number_integer()) {
    throw Error(ErrorCode::ParseError,
                origin + ": field '" + field + "' must be an integer");
  }
  return j[field].get<int>();
}

}  // namespace

WeightedGraph parse_graph_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::ParseError, origin + ": top level must be an object");
  }

  WeightedGraph g;
  g.node_count = require_int(j, "nodes", origin);
  if (!j.contains("edges") || !j["edges"].is_array()) {
    throw Error(ErrorCode::ParseError, origin + ": field 'edges' must be an array");
  }
  size_t k = 0;
  for (const json& entry : j["edges"]) {
    ++k;
    const std::string where = origin + ": edge " + std::to_string(k);
    if (!entry.is_array() || entry.size() != 3) {
      throw Error(ErrorCode::ParseError, where + " must be a [i, j, w] triple");
    }
    if (!entry[0].is_number_integer() || !entry[1].is_number_integer()) {
      throw Error(ErrorCode::ParseError, where + ": node indices must be integers");
    }
    if (!entry[2].is_number()) {
      throw Error(ErrorCode::ParseError, where + ": weight must be a number");
    }
    Edge e;
    e.i = entry[0].get<int>();
    e.j = entry[1].get<int>();
    e.weight = entry[2].get<double>();
    if (!std::isfinite(e.weight) || e.weight <= 0.0) {
      throw Error(ErrorCode::ParseError, where + ": weight must be finite and > 0");
    }
    g.edges.push_back(e);
  }
  try {
    validate(g);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what());
  }
  return g;
}

WeightedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open graph file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph_json(buf.str(), path.filename().string());
}

}  // namespace disth2
