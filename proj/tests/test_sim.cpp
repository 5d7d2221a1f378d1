#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "disth2/design.hpp"
#include "disth2/sim.hpp"
#include "support.hpp"

using namespace disth2;

namespace {

AgentDynamics scalar_agent(double a = 0.0) {
  AgentDynamics agent;
  agent.A = Matrix::Constant(1, 1, a);
  agent.B = Matrix::Constant(1, 1, 1.0);
  agent.C = Matrix::Zero(2, 1);
  agent.C(0, 0) = 1.0;
  agent.D = Matrix::Zero(2, 1);
  agent.D(1, 0) = 1.0;
  agent.E = Matrix::Constant(1, 1, 1.0);
  return agent;
}

NetworkRealization p2_net(double k_gain) {
  return build_closed_loop(scalar_agent(), WeightedGraph{2, {{1, 2, 1.0}}},
                           Matrix::Constant(1, 1, k_gain));
}

}  // namespace

TEST_CASE("simulate reproduces the closed-form P2 disagreement decay") {
  const NetworkRealization net = p2_net(-0.5);
  Vector x0(2);
  x0 << 1.0, -1.0;
  const Trajectory traj = simulate(net, x0, DisturbanceSpec::zero(), 1.0, 1e-3);

  REQUIRE(traj.times.size() == 1001);
  CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  // delta' = -delta, delta(0) = 2 => delta(1) = 2/e
  CHECK(traj.disagreement[1000] == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-6));
  CHECK(traj.disagreement[1000] == doctest::Approx(0.7357588823428847).epsilon(1e-6));
}

TEST_CASE("consensus initial states produce identically zero output") {
  const NetworkRealization net = p2_net(-0.5);
  Vector x0(2);
  x0 << 3.7, 3.7;
  const Trajectory traj = simulate(net, x0, DisturbanceSpec::zero(), 1.0, 1e-2);
  CHECK(traj.zeta.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(traj.disagreement.maxCoeff() <= 1e-12);

  const Trajectory rest = simulate(net, Vector::Zero(2), DisturbanceSpec::zero(), 1.0, 1e-2);
  CHECK(rest.states.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adding a consensus offset leaves zeta and disagreement unchanged") {
  std::mt19937 rng(411);
  const AgentDynamics agent = testsupport::random_standard_agent(rng, 2);
  const WeightedGraph g = testsupport::random_connected_graph(rng, 3);
  const Matrix k = -0.4 * testsupport::random_matrix(rng, 1, 2).cwiseAbs();
  const NetworkRealization net = build_closed_loop(agent, g, k);

  const Vector x0 = testsupport::random_matrix(rng, 6, 1);
  const Vector v = testsupport::random_matrix(rng, 2, 1);
  Vector shifted = x0;
  for (int i = 0; i < 3; ++i) shifted.segment(2 * i, 2) += v;

  const Trajectory base = simulate(net, x0, DisturbanceSpec::zero(), 2.0, 1e-2);
  const Trajectory moved = simulate(net, shifted, DisturbanceSpec::zero(), 2.0, 1e-2);
  CHECK((base.zeta - moved.zeta).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((base.disagreement - moved.disagreement).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("halving dt leaves the exact-discretization endpoint unchanged") {
  const NetworkRealization net = p2_net(-0.5);
  Vector x0(2);
  x0 << 1.0, -1.0;
  const Trajectory coarse = simulate(net, x0, DisturbanceSpec::zero(), 1.0, 1e-2);
  const Trajectory fine = simulate(net, x0, DisturbanceSpec::zero(), 1.0, 5e-3);
  CHECK(std::abs(coarse.disagreement[coarse.disagreement.size() - 1] -
                 fine.disagreement[fine.disagreement.size() - 1]) <= 1e-9);
}

TEST_CASE("simulate validates its inputs") {
  const NetworkRealization net = p2_net(-0.5);
  CHECK_THROWS_AS(simulate(net, Vector::Zero(3), DisturbanceSpec::zero(), 1.0, 1e-2), Error);
  CHECK_THROWS_AS(simulate(net, Vector::Zero(2), DisturbanceSpec::zero(), 1.0, 0.0), Error);
  CHECK_THROWS_AS(simulate(net, Vector::Zero(2), DisturbanceSpec::zero(), 1e-3, 1e-2), Error);
  CHECK_THROWS_AS(simulate(net, Vector::Zero(2), DisturbanceSpec::impulse(3), 1.0, 1e-2), Error);
}

TEST_CASE("sampled disturbances enter through zero-order hold") {
  const NetworkRealization net = p2_net(-0.5);
  const auto path = std::filesystem::temp_directory_path() / "disth2_test_samples.csv";
  {
    std::ofstream out(path);
    out << "1.0, 0.0\n";  // one step of disturbance on agent 1, then zero
  }
  const Trajectory traj =
      simulate(net, Vector::Zero(2), DisturbanceSpec::samples(path, 1.0), 0.5, 1e-2);
  std::filesystem::remove(path);
  CHECK(traj.states.row(1).cwiseAbs().maxCoeff() > 0.0);
  CHECK(traj.disagreement[traj.disagreement.size() - 1] > 0.0);
}

TEST_CASE("sync_metrics fits the closed-form decay rate") {
  const NetworkRealization net = p2_net(-0.5);
  Vector x0(2);
  x0 << 1.0, -1.0;
  const Trajectory traj = simulate(net, x0, DisturbanceSpec::zero(), 8.0, 1e-3);
  const SyncMetrics metrics = sync_metrics(traj);
  CHECK(metrics.fitted_decay_rate == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(metrics.final_disagreement == doctest::Approx(2.0 * std::exp(-8.0)).epsilon(1e-6));
}

TEST_CASE("sync_metrics flags degenerate trajectories") {
  const NetworkRealization net = p2_net(-0.5);
  Vector x0(2);
  x0 << 0.5, 0.5;  // consensus
  const Trajectory traj = simulate(net, x0, DisturbanceSpec::zero(), 2.0, 0.1);
  try {
    sync_metrics(traj);
    FAIL_CHECK("expected DegenerateTrajectory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateTrajectory);
  }
}

TEST_CASE("sync_metrics reports growth for destabilizing gains") {
  const NetworkRealization net =
      build_closed_loop(scalar_agent(1.0), WeightedGraph{2, {{1, 2, 1.0}}}, Matrix::Zero(1, 1));
  Vector x0(2);
  x0 << 1.0, -1.0;
  const Trajectory traj = simulate(net, x0, DisturbanceSpec::zero(), 3.0, 1e-2);
  const SyncMetrics metrics = sync_metrics(traj);
  CHECK(metrics.fitted_decay_rate > 0.5);
}

TEST_CASE("impulse_energy sums to the exact global cost on the worked case") {
  const NetworkRealization net = p2_net(-0.35355339059327373);
  const double j = global_cost(net);
  CHECK(j == doctest::Approx(2.1213203435596424).epsilon(1e-6));

  double energy = 0.0;
  for (int channel = 1; channel <= 2; ++channel) {
    energy += impulse_energy(net, channel, 60.0, 1e-3);
  }
  CHECK(std::abs(energy - j) <= 2e-3);
}

TEST_CASE("impulse_energy edge cases") {
  NetworkRealization net = p2_net(-0.5);
  AgentDynamics silent = net.agent;
  silent.E = Matrix::Zero(1, 1);
  const NetworkRealization mute = build_closed_loop(silent, net.graph, net.K);
  CHECK(impulse_energy(mute, 1, 10.0, 1e-2) == doctest::Approx(0.0).scale(1.0));

  CHECK_THROWS_AS(impulse_energy(net, 5, 10.0, 1e-2), Error);

  const NetworkRealization open = p2_net(0.0);
  try {
    impulse_energy(open, 1, 10.0, 1e-2);
    FAIL_CHECK("expected NotSynchronizing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSynchronizing);
  }
}

TEST_CASE("channel-sum identity on randomized synchronizing nets") {
  std::mt19937 rng(421);
  int checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 2);
    const int agents = 2 + static_cast<int>(rng() % 3);
    const AgentDynamics agent = testsupport::random_standard_agent(rng, n);
    const WeightedGraph g = testsupport::random_connected_graph(rng, agents);
    const LaplacianSpectrum spec = spectrum(laplacian(g));

    Matrix k;
    try {
      k = design_protocol(agent, spec, 1e9, Method::Thm4).K;
    } catch (const Error&) {
      continue;
    }
    const NetworkRealization net = build_closed_loop(agent, g, k);
    const double j = global_cost(net);
    const double horizon = default_network_horizon(agent, spec, k);
    const double dt = horizon / 40000.0;

    double energy = 0.0;
    for (int channel = 1; channel <= net.Etilde.cols(); ++channel) {
      energy += impulse_energy(net, channel, horizon, dt);
    }
    CHECK(std::abs(energy - j) <= 1e-3 * std::max(1.0, j));
    ++checked;
  }
  CHECK(checked >= 4);
}

TEST_CASE("trajectory CSV export carries the documented header and full precision") {
  const NetworkRealization net = p2_net(-0.5);
  Vector x0(2);
  x0 << 1.0, -1.0;
  const Trajectory traj = simulate(net, x0, DisturbanceSpec::zero(), 0.1, 1e-2);

  std::ostringstream out;
  write_trajectory_csv(traj, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x_1_1,x_2_1,zeta_1,zeta_2,disagreement");

  std::string first;
  std::getline(in, first);
  CHECK(first.substr(0, 2) == "0,");
  // 17-significant-digit round trip: parse the disagreement column back
  const auto comma = first.rfind(',');
  CHECK(std::stod(first.substr(comma + 1)) == 2.0);
}
