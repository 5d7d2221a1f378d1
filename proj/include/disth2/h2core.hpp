#pragma once

#include "disth2/matkernel.hpp"

namespace disth2 {

/// State-space triple (Abar, Cbar, Ebar) whose impulse response from the
/// disturbance to the output is Cbar e^{Abar t} Ebar.
struct PerformanceTriple {
  Matrix Abar;  // n x n
  Matrix Cbar;  // p x n
  Matrix Ebar;  // n x q
};

void validate_triple(const PerformanceTriple& sys);

/// Data backing a J < gamma claim: P >= 0 with a strictly negative Lyapunov
/// margin and positive trace slack.
struct CostCertificate {
  Matrix P;
  double gamma = 0.0;
  double slack = 0.0;        // gamma - tr(Ebar' P Ebar)
  double lyap_margin = 0.0;  // largest eigenvalue of Abar'P + P Abar + Cbar'Cbar
};

enum class CertifyStatus { Accepted, RejectedLyapunov, RejectedTrace };

struct CertifyOutcome {
  CertifyStatus status = CertifyStatus::RejectedLyapunov;
  CostCertificate certificate;
  bool accepted() const { return status == CertifyStatus::Accepted; }
};

const char* certify_status_name(CertifyStatus s);

/// Exact H2 cost tr(Ebar' Y Ebar) with Y the Lyapunov solution for
/// Q = Cbar'Cbar. Throws NotStable when Abar is not Hurwitz.
double exact_cost(const PerformanceTriple& sys);

/// Horizon that makes the integrand tail negligible: 40 time constants of
/// the decay-rate lower bound 1/(2 ||Y||) with Y = lyap(Abar, I).
double default_horizon(const PerformanceTriple& sys);

/// Independent oracle: composite Simpson quadrature of
/// tr(Ebar' e^{Abar' t} Cbar'Cbar e^{Abar t} Ebar) over [0, horizon].
double quadrature_cost(const PerformanceTriple& sys, double horizon, int steps);

/// Default-parameter oracle: composite Simpson over doubling segments, so
/// fast transients are finely resolved while the rigorous (often very
/// conservative) tail bound from default_horizon is covered in O(log)
/// segments.
double quadrature_cost(const PerformanceTriple& sys);

/// Checks P >= 0 against the strict Lyapunov inequality and the trace bound.
/// Acceptance proves Abar Hurwitz and exact_cost(sys) < gamma.
CertifyOutcome certify_cost(const PerformanceTriple& sys, const Matrix& p, double gamma);

struct FeedbackDesign {
  Matrix K;  // m x n
  CostCertificate certificate;
};

/// Single-system suboptimal state feedback: P from the Riccati solve with
/// Q = C'C, K = -B'P. Requires standard form (D'C = 0, D'D = I). Throws
/// NotStandardForm or GammaInfeasible (payload: achieved tr(E'PE)).
FeedbackDesign suboptimal_feedback_single(const Matrix& a, const Matrix& b,
                                          const Matrix& c, const Matrix& d,
                                          const Matrix& e, double gamma);

bool is_standard_form(const Matrix& c, const Matrix& d, double tol = 1e-12);

}  // namespace disth2
