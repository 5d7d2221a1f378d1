#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "disth2/network.hpp"

namespace disth2 {

struct DisturbanceSpec {
  enum class Kind { Zero, Impulse, Samples };

  Kind kind = Kind::Zero;
  int channel = 1;    // 1-based, impulse only
  double scale = 1.0;
  std::filesystem::path samples_path;  // samples only

  static DisturbanceSpec zero();
  static DisturbanceSpec impulse(int channel, double scale = 1.0);
  static DisturbanceSpec samples(std::filesystem::path path, double scale = 1.0);
};

/// Uniform-grid trajectory of the closed-loop network. Row k of `states`
/// and `zeta` is the sample at times[k]; `disagreement` is the max over
/// agent pairs of ||x_i - x_j||_inf.
struct Trajectory {
  std::vector<double> times;
  Matrix states;        // (S+1) x nN
  Matrix zeta;          // (S+1) x pM
  Vector disagreement;  // S+1
  int agent_count = 0;
  int state_dim = 0;    // n
  int zeta_dim = 0;     // pM
};

struct SyncMetrics {
  double final_disagreement = 0.0;
  double fitted_decay_rate = 0.0;  // slope of log(disagreement) over the final half
};

/// Exact-discretization simulation: x_{k+1} = e^{Atilde dt} x_k, with a
/// zero-order-hold input term for sampled disturbances. Impulses enter as
/// the state jump x0 += scale * Etilde e_channel at t = 0.
Trajectory simulate(const NetworkRealization& net, const Vector& x0,
                    const DisturbanceSpec& dist, double t_final, double dt);

/// Least-squares fit of log(disagreement) over the final half of the horizon.
/// Throws DegenerateTrajectory when the disagreement stays below 1e-14.
SyncMetrics sync_metrics(const Trajectory& traj);

/// Simpson quadrature of ||zeta(t)||^2 for a unit impulse in one disturbance
/// channel; summed over all qN channels this reproduces the global H2 cost.
double impulse_energy(const NetworkRealization& net, int channel, double t_final, double dt);

/// CSV export: header `t,x_1_1..x_N_n,zeta_1..zeta_pM,disagreement`, values
/// printed with 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace disth2
