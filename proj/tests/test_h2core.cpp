#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "disth2/h2core.hpp"
#include "support.hpp"

using namespace disth2;
using testsupport::random_stable_triple;

namespace {

PerformanceTriple scalar_triple(double a, std::initializer_list<double> c_rows, double e) {
  PerformanceTriple sys;
  sys.Abar = Matrix::Constant(1, 1, a);
  sys.Cbar.resize(static_cast<Eigen::Index>(c_rows.size()), 1);
  Eigen::Index r = 0;
  for (double v : c_rows) sys.Cbar(r++, 0) = v;
  sys.Ebar = Matrix::Constant(1, 1, e);
  return sys;
}

}  // namespace

TEST_CASE("exact_cost on scalar instances") {
  CHECK(exact_cost(scalar_triple(-1.0, {std::sqrt(2.0)}, 1.0)) == doctest::Approx(1.0));
  CHECK(exact_cost(scalar_triple(-1.0, {1.0}, 0.0)) == doctest::Approx(0.0));

  // stacked two-row output; oracle Y = C'C / (2 |a|)
  const PerformanceTriple sys = scalar_triple(-0.70710678118654752, {1.4142135623730951, -1.0}, 1.0);
  const double oracle = 3.0 / 1.4142135623730951;
  CHECK(exact_cost(sys) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(exact_cost(sys) == doctest::Approx(2.12132).epsilon(1e-5));
  // cross-check by the quadrature oracle
  CHECK(quadrature_cost(sys, 40.0, 4000) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("exact_cost rejects unstable systems") {
  try {
    exact_cost(scalar_triple(0.5, {1.0}, 1.0));
    FAIL_CHECK("expected NotStable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotStable);
  }
}

TEST_CASE("quadrature_cost on worked instances") {
  CHECK(quadrature_cost(scalar_triple(-1.0, {std::sqrt(2.0)}, 1.0), 40.0, 4000) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(quadrature_cost(scalar_triple(-1.0, {2.0}, 0.0), 40.0, 4000) ==
        doctest::Approx(0.0).scale(1.0));
  CHECK(quadrature_cost(scalar_triple(-2.0, {2.0}, 1.0), 40.0, 4000) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("quadrature_cost rejects unstable systems") {
  CHECK_THROWS_AS(quadrature_cost(scalar_triple(0.0, {1.0}, 1.0), 10.0, 100), Error);
}

TEST_CASE("default horizon and steps give oracle-grade accuracy on random triples") {
  std::mt19937 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const PerformanceTriple sys = random_stable_triple(rng, n, 2, 1);
    const double exact = exact_cost(sys);
    const double quad = quadrature_cost(sys);
    CHECK(std::abs(exact - quad) <= 1e-5 * std::max(1.0, exact));
  }
}

TEST_CASE("certify_cost accepts and rejects per the strict margins") {
  const PerformanceTriple sys = scalar_triple(-1.0, {std::sqrt(2.0)}, 1.0);

  CertifyOutcome out = certify_cost(sys, Matrix::Constant(1, 1, 1.1), 1.2);
  CHECK(out.accepted());
  CHECK(out.certificate.lyap_margin == doctest::Approx(-0.2));
  CHECK(out.certificate.slack == doctest::Approx(0.1));

  out = certify_cost(sys, Matrix::Constant(1, 1, 1.0), 1.2);
  CHECK(out.status == CertifyStatus::RejectedLyapunov);
  CHECK(out.certificate.lyap_margin == doctest::Approx(0.0).scale(1.0));

  out = certify_cost(sys, Matrix::Constant(1, 1, 1.1), 1.05);
  CHECK(out.status == CertifyStatus::RejectedTrace);
}

TEST_CASE("certify_cost rejects non-PSD P as a precondition violation") {
  const PerformanceTriple sys = scalar_triple(-1.0, {1.0}, 1.0);
  CHECK_THROWS_AS(certify_cost(sys, Matrix::Constant(1, 1, -0.5), 1.0), Error);
}

TEST_CASE("accepted certificates are sound on randomized instances") {
  std::mt19937 rng(111);
  int accepted = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const PerformanceTriple sys = random_stable_triple(rng, n, 2, 1);
    const Matrix q = sys.Cbar.transpose() * sys.Cbar;
    const double eps = default_eps(q);
    const Matrix p = solve_lyapunov(sys.Abar, q + eps * Matrix::Identity(n, n));
    const double trace = (sys.Ebar.transpose() * p * sys.Ebar).trace();

    std::uniform_real_distribution<double> bump(0.9, 1.5);
    const double gamma = trace * bump(rng);
    const CertifyOutcome out = certify_cost(sys, p, gamma);
    if (out.accepted()) {
      ++accepted;
      CHECK(exact_cost(sys) < gamma);
    }
  }
  CHECK(accepted > 10);
}

TEST_CASE("eps-family traces decrease monotonically toward the exact cost") {
  std::mt19937 rng(121);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const PerformanceTriple sys = random_stable_triple(rng, n, 2, 1);
    const Matrix q = sys.Cbar.transpose() * sys.Cbar;
    const double exact = exact_cost(sys);

    double previous = std::numeric_limits<double>::infinity();
    for (double eps : {1e-2, 1e-4, 1e-6}) {
      const Matrix p = solve_lyapunov(sys.Abar, q + eps * Matrix::Identity(n, n));
      const double trace = (sys.Ebar.transpose() * p * sys.Ebar).trace();
      CHECK(trace < previous);
      CHECK(trace > exact);
      previous = trace;
    }
    CHECK(previous - exact <= 1e-4 * std::max(1.0, exact));
  }
}

TEST_CASE("suboptimal_feedback_single on the scalar worked instance") {
  Matrix a = Matrix::Zero(1, 1);
  Matrix b = Matrix::Constant(1, 1, 1.0);
  Matrix c(2, 1);
  c << 1, 0;
  Matrix d(2, 1);
  d << 0, 1;
  Matrix e = Matrix::Constant(1, 1, 1.0);

  const FeedbackDesign fb = suboptimal_feedback_single(a, b, c, d, e, 2.0);
  CHECK(fb.K(0, 0) == doctest::Approx(-1.0).epsilon(1e-5));
  const double trace = (e.transpose() * fb.certificate.P * e).trace();
  CHECK(trace == doctest::Approx(1.0).epsilon(1e-5));

  // verify by the oracle: closed loop Abar = -1, Cbar'Cbar = 1 + K^2 = 2
  PerformanceTriple closed{a + b * fb.K, c + d * fb.K, e};
  CHECK(exact_cost(closed) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(quadrature_cost(closed, 40.0, 4000) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(exact_cost(closed) < 2.0);

  // infeasible bound reports the achieved trace
  try {
    suboptimal_feedback_single(a, b, c, d, e, 0.5);
    FAIL_CHECK("expected GammaInfeasible");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::GammaInfeasible);
    CHECK(err.value() == doctest::Approx(1.0).epsilon(1e-5));
  }

  // standard-form gate
  Matrix d_bad(2, 1);
  d_bad << 0.3, 1;
  try {
    suboptimal_feedback_single(a, b, c, d_bad, e, 2.0);
    FAIL_CHECK("expected NotStandardForm");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NotStandardForm);
  }
}

TEST_CASE("designed feedback always passes certify_cost on the closed loop") {
  std::mt19937 rng(131);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const AgentDynamics agent = testsupport::random_standard_agent(rng, n);

    // pick gamma comfortably above the achievable trace
    const Matrix q = agent.C.transpose() * agent.C;
    const Matrix p0 = solve_riccati(agent.A, agent.B, q, default_eps(q));
    const double gamma = 2.0 * (agent.E.transpose() * p0 * agent.E).trace() + 0.1;

    const FeedbackDesign fb =
        suboptimal_feedback_single(agent.A, agent.B, agent.C, agent.D, agent.E, gamma);
    PerformanceTriple closed{agent.A + agent.B * fb.K, agent.C + agent.D * fb.K, agent.E};
    const CertifyOutcome out = certify_cost(closed, fb.certificate.P, gamma);
    CHECK(out.accepted());
    CHECK(exact_cost(closed) < gamma);
  }
}
