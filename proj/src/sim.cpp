#include "disth2/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

namespace disth2 {

DisturbanceSpec DisturbanceSpec::zero() { return {}; }

DisturbanceSpec DisturbanceSpec::impulse(int channel, double scale) {
  DisturbanceSpec d;
  d.kind = Kind::Impulse;
  d.channel = channel;
  d.scale = scale;
  return d;
}

DisturbanceSpec DisturbanceSpec::samples(std::filesystem::path path, double scale) {
  DisturbanceSpec d;
  d.kind = Kind::Samples;
  d.samples_path = std::move(path);
  d.scale = scale;
  return d;
}

namespace {

// One disturbance row per simulation step (ZOH over [t_k, t_{k+1})),
// comma- or whitespace-separated, qN values each. Missing rows are zero.
std::vector<Vector> load_sample_rows(const std::filesystem::path& path, Eigen::Index width) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open samples file: " + path.string());
  }
  std::vector<Vector> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& ch : line) {
      if (ch == ',' || ch == '\t') ch = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> values;
    double v = 0.0;
    while (fields >> v) values.push_back(v);
    if (values.empty()) continue;  // blank line
    if (static_cast<Eigen::Index>(values.size()) != width) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ": line " + std::to_string(lineno) + " has " +
                      std::to_string(values.size()) + " values, expected " +
                      std::to_string(width));
    }
    Vector row(width);
    for (Eigen::Index i = 0; i < width; ++i) {
      if (!std::isfinite(values[static_cast<size_t>(i)])) {
        throw Error(ErrorCode::ParseError,
                    path.string() + ": line " + std::to_string(lineno) + " has a non-finite value");
      }
      row[i] = values[static_cast<size_t>(i)];
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double pair_disagreement(const Vector& x, int agents, int n) {
  double worst = 0.0;
  for (int i = 0; i < agents; ++i) {
    for (int j = i + 1; j < agents; ++j) {
      const double d =
          (x.segment(i * n, n) - x.segment(j * n, n)).cwiseAbs().maxCoeff();
      worst = std::max(worst, d);
    }
  }
  return worst;
}

int step_count(double t_final, double dt) {
  const double raw = t_final / dt;
  const auto rounded = static_cast<long long>(std::llround(raw));
  if (rounded >= 1 && std::abs(rounded * dt - t_final) <= 1e-9 * std::max(1.0, t_final)) {
    return static_cast<int>(rounded);
  }
  return static_cast<int>(std::floor(raw));
}

}  // namespace

Trajectory simulate(const NetworkRealization& net, const Vector& x0,
                    const DisturbanceSpec& dist, double t_final, double dt) {
  const int n = net.agent.n();
  const int agents = net.graph.node_count;
  const Eigen::Index state_dim = net.Atilde.rows();
  const Eigen::Index dist_dim = net.Etilde.cols();

  if (!(dt > 0.0) || !(t_final >= dt)) {
    throw Error(ErrorCode::InvalidInput, "simulate: need dt > 0 and T >= dt");
  }
  if (x0.size() != state_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "simulate: x0 must have " + std::to_string(state_dim) + " entries");
  }
  if (!x0.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "simulate: x0 must be finite");
  }

  Vector x = x0;
  std::vector<Vector> sample_rows;
  if (dist.kind == DisturbanceSpec::Kind::Impulse) {
    if (dist.channel < 1 || dist.channel > dist_dim) {
      throw Error(ErrorCode::InvalidInput,
                  "simulate: impulse channel out of range 1.." + std::to_string(dist_dim));
    }
    x += dist.scale * net.Etilde.col(dist.channel - 1);
  } else if (dist.kind == DisturbanceSpec::Kind::Samples) {
    sample_rows = load_sample_rows(dist.samples_path, dist_dim);
  }

  const int steps = step_count(t_final, dt);
  const bool hold_input = dist.kind == DisturbanceSpec::Kind::Samples;

  // Exact ZOH discretization via the augmented exponential
  // exp([[A, E],[0, 0]] dt) = [[Phi, Gamma],[0, I]]; Atilde may be singular.
  Matrix phi;
  Matrix gamma_zoh;
  if (hold_input) {
    Matrix aug = Matrix::Zero(state_dim + dist_dim, state_dim + dist_dim);
    aug.topLeftCorner(state_dim, state_dim) = net.Atilde;
    aug.topRightCorner(state_dim, dist_dim) = net.Etilde;
    const Matrix big = expm(aug, dt);
    phi = big.topLeftCorner(state_dim, state_dim);
    gamma_zoh = big.topRightCorner(state_dim, dist_dim);
  } else {
    phi = expm(net.Atilde, dt);
  }

  Trajectory traj;
  traj.agent_count = agents;
  traj.state_dim = n;
  traj.zeta_dim = static_cast<int>(net.Ctilde.rows());
  traj.times.resize(static_cast<size_t>(steps) + 1);
  traj.states.resize(steps + 1, state_dim);
  traj.zeta.resize(steps + 1, net.Ctilde.rows());
  traj.disagreement.resize(steps + 1);

  for (int k = 0; k <= steps; ++k) {
    traj.times[static_cast<size_t>(k)] = k * dt;
    traj.states.row(k) = x.transpose();
    traj.zeta.row(k) = (net.Ctilde * x).transpose();
    traj.disagreement[k] = pair_disagreement(x, agents, n);
    if (k == steps) break;
    if (hold_input) {
      Vector d = Vector::Zero(dist_dim);
      if (static_cast<size_t>(k) < sample_rows.size()) {
        d = sample_rows[static_cast<size_t>(k)];
      }
      x = (phi * x + gamma_zoh * (dist.scale * d)).eval();
    } else {
      x = (phi * x).eval();
    }
  }
  if (!traj.states.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "simulate: trajectory diverged to non-finite values");
  }
  return traj;
}

SyncMetrics sync_metrics(const Trajectory& traj) {
  const int samples = static_cast<int>(traj.times.size());
  if (samples < 10) {
    throw Error(ErrorCode::InvalidInput, "sync_metrics: need at least 10 samples");
  }
  if (traj.disagreement.maxCoeff() < 1e-14) {
    throw Error(ErrorCode::DegenerateTrajectory,
                "sync_metrics: disagreement below 1e-14 throughout; decay rate undefined");
  }

  SyncMetrics metrics;
  metrics.final_disagreement = traj.disagreement[samples - 1];

  // Line fit of log(disagreement) over the final half of the horizon,
  // skipping underflowed samples.
  double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
  int count = 0;
  for (int k = samples / 2; k < samples; ++k) {
    const double d = traj.disagreement[k];
    if (d < 1e-300) continue;
    const double t = traj.times[static_cast<size_t>(k)];
    const double y = std::log(d);
    sum_t += t;
    sum_y += y;
    sum_tt += t * t;
    sum_ty += t * y;
    ++count;
  }
  const double denom = count * sum_tt - sum_t * sum_t;
  if (count < 2 || std::abs(denom) < 1e-300) {
    throw Error(ErrorCode::DegenerateTrajectory,
                "sync_metrics: not enough usable samples in the fit window");
  }
  metrics.fitted_decay_rate = (count * sum_ty - sum_t * sum_y) / denom;
  return metrics;
}

double impulse_energy(const NetworkRealization& net, int channel, double t_final, double dt) {
  const LaplacianSpectrum spec = spectrum(laplacian(net.graph));
  const SyncReport sync = check_synchronization(net.agent, spec, net.K);
  if (!sync.synchronized) {
    throw Error(ErrorCode::NotSynchronizing, "impulse_energy: protocol does not synchronize");
  }
  if (channel < 1 || channel > net.Etilde.cols()) {
    throw Error(ErrorCode::InvalidInput,
                "impulse_energy: channel out of range 1.." +
                    std::to_string(net.Etilde.cols()));
  }
  if (!(dt > 0.0) || !(t_final >= dt)) {
    throw Error(ErrorCode::InvalidInput, "impulse_energy: need dt > 0 and T >= dt");
  }

  int steps = step_count(t_final, dt);
  if (steps % 2 != 0) ++steps;

  // The impulse enters as a state jump through Etilde. Propagate only the
  // disagreement component: zeta is unchanged (Ctilde annihilates consensus)
  // and the projected state stays bounded when A itself is unstable.
  const int agents = net.graph.node_count;
  const int n = net.agent.n();
  const Matrix phi = expm(net.Atilde, dt);
  Vector x = remove_consensus_component(net.Etilde.col(channel - 1), agents, n);

  double acc = (net.Ctilde * x).squaredNorm();
  for (int k = 1; k <= steps; ++k) {
    x = remove_consensus_component(phi * x, agents, n);
    const double g = (net.Ctilde * x).squaredNorm();
    const double w = (k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += w * g;
  }
  return acc * dt / 3.0;
}

namespace {

void append_g17(std::string& line, double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  line.append(buf, res.ptr);
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  std::string line = "t";
  for (int i = 1; i <= traj.agent_count; ++i) {
    for (int j = 1; j <= traj.state_dim; ++j) {
      line += ",x_" + std::to_string(i) + "_" + std::to_string(j);
    }
  }
  for (int j = 1; j <= traj.zeta_dim; ++j) line += ",zeta_" + std::to_string(j);
  line += ",disagreement\n";
  out << line;

  for (size_t k = 0; k < traj.times.size(); ++k) {
    line.clear();
    append_g17(line, traj.times[k]);
    const auto row = static_cast<Eigen::Index>(k);
    for (Eigen::Index c = 0; c < traj.states.cols(); ++c) {
      line += ',';
      append_g17(line, traj.states(row, c));
    }
    for (Eigen::Index c = 0; c < traj.zeta.cols(); ++c) {
      line += ',';
      append_g17(line, traj.zeta(row, c));
    }
    line += ',';
    append_g17(line, traj.disagreement[row]);
    line += '\n';
    out << line;
  }
}

}  // namespace disth2
