#include "disth2/h2core.hpp"

#include <algorithm>
#include <cmath>

namespace disth2 {

void validate_triple(const PerformanceTriple& sys) {
  const Eigen::Index n = sys.Abar.rows();
  if (n == 0 || sys.Abar.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "Abar must be square and nonempty");
  }
  if (sys.Cbar.cols() != n || sys.Cbar.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "Cbar must have n columns");
  }
  if (sys.Ebar.rows() != n || sys.Ebar.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "Ebar must have n rows");
  }
  if (!sys.Abar.allFinite() || !sys.Cbar.allFinite() || !sys.Ebar.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "system matrices must be finite");
  }
}

const char* certify_status_name(CertifyStatus s) {
  switch (s) {
    case CertifyStatus::Accepted: return "accepted";
    case CertifyStatus::RejectedLyapunov: return "rejected_lyapunov";
    case CertifyStatus::RejectedTrace: return "rejected_trace";
  }
  return "unknown";
}

double exact_cost(const PerformanceTriple& sys) {
  validate_triple(sys);
  if (!is_hurwitz(sys.Abar)) {
    throw Error(ErrorCode::NotStable, "exact_cost: Abar is not Hurwitz");
  }
  const Matrix y = solve_lyapunov(sys.Abar, sys.Cbar.transpose() * sys.Cbar);
  const double j = (sys.Ebar.transpose() * y * sys.Ebar).trace();
  return std::max(j, 0.0);
}

double default_horizon(const PerformanceTriple& sys) {
  const Matrix y = solve_lyapunov(sys.Abar, Matrix::Identity(sys.Abar.rows(), sys.Abar.cols()));
  const double y_norm = sym_eig(y).eigenvalues.cwiseAbs().maxCoeff();
  return std::max(1.0, 80.0 * y_norm);
}

double quadrature_cost(const PerformanceTriple& sys, double horizon, int steps) {
  validate_triple(sys);
  if (!(horizon > 0.0) || steps < 2) {
    throw Error(ErrorCode::InvalidInput, "quadrature_cost: horizon > 0 and steps >= 2 required");
  }
  if (!is_hurwitz(sys.Abar)) {
    throw Error(ErrorCode::NotStable, "quadrature_cost: Abar is not Hurwitz");
  }
  if (steps % 2 != 0) ++steps;

  const double h = horizon / steps;
  const Matrix phi = expm(sys.Abar, h);

  // Propagate X_k = e^{Abar t_k} Ebar on the uniform grid; the integrand is
  // the squared Frobenius norm of Cbar X_k.
  Matrix x = sys.Ebar;
  double acc = (sys.Cbar * x).squaredNorm();
  for (int k = 1; k <= steps; ++k) {
    x = (phi * x).eval();
    const double g = (sys.Cbar * x).squaredNorm();
    const double w = (k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += w * g;
  }
  return acc * h / 3.0;
}

double quadrature_cost(const PerformanceTriple& sys) {
  validate_triple(sys);
  if (!is_hurwitz(sys.Abar)) {
    throw Error(ErrorCode::NotStable, "quadrature_cost: Abar is not Hurwitz");
  }
  const double horizon = default_horizon(sys);
  const double rate = std::max(sys.Abar.norm(), 4.0 / horizon);
  const int seg_steps = 4096;

  double seg_len = 4.0 / rate;
  double t = 0.0;
  double total = 0.0;
  Matrix x = sys.Ebar;
  for (int seg = 0; seg < 80 && t < horizon; ++seg) {
    const double len = std::min(seg_len, horizon - t);
    const double h = len / seg_steps;
    const Matrix phi = expm(sys.Abar, h);
    double acc = (sys.Cbar * x).squaredNorm();
    for (int k = 1; k <= seg_steps; ++k) {
      x = (phi * x).eval();
      const double w = (k == seg_steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      acc += w * (sys.Cbar * x).squaredNorm();
    }
    total += acc * h / 3.0;
    t += len;
    seg_len *= 2.0;
  }
  return total;
}

CertifyOutcome certify_cost(const PerformanceTriple& sys, const Matrix& p, double gamma) {
  validate_triple(sys);
  const Eigen::Index n = sys.Abar.rows();
  if (p.rows() != n || p.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "certify_cost: P size mismatch");
  }
  if (!is_symmetric(p, 1e-12 * std::max(1.0, max_abs(p)))) {
    throw Error(ErrorCode::InvalidInput, "certify_cost: P must be symmetric");
  }
  if (sym_eig(p).eigenvalues.minCoeff() < -1e-10) {
    throw Error(ErrorCode::InvalidInput, "certify_cost: P must be positive semidefinite");
  }

  const Matrix ctc = sys.Cbar.transpose() * sys.Cbar;
  const Matrix lyap = sys.Abar.transpose() * p + p * sys.Abar + ctc;

  CertifyOutcome out;
  out.certificate.P = p;
  out.certificate.gamma = gamma;
  out.certificate.lyap_margin = sym_eig(0.5 * (lyap + lyap.transpose())).eigenvalues.maxCoeff();
  const double trace = (sys.Ebar.transpose() * p * sys.Ebar).trace();
  out.certificate.slack = gamma - trace;

  // Strictness enforced with explicit margins; exact zeros reject.
  if (!(out.certificate.lyap_margin < -1e-12 * max_abs(ctc))) {
    out.status = CertifyStatus::RejectedLyapunov;
    return out;
  }
  if (!(out.certificate.slack > 1e-12 * std::abs(gamma))) {
    out.status = CertifyStatus::RejectedTrace;
    return out;
  }
  out.status = CertifyStatus::Accepted;
  return out;
}

bool is_standard_form(const Matrix& c, const Matrix& d, double tol) {
  if (d.rows() != c.rows()) return false;
  const Matrix dtc = d.transpose() * c;
  const Matrix dtd = d.transpose() * d;
  const Matrix ident = Matrix::Identity(d.cols(), d.cols());
  return max_abs(dtc) <= tol && max_abs(dtd - ident) <= tol;
}

FeedbackDesign suboptimal_feedback_single(const Matrix& a, const Matrix& b,
                                          const Matrix& c, const Matrix& d,
                                          const Matrix& e, double gamma) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || c.cols() != n || e.rows() != n ||
      d.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "suboptimal_feedback_single: size mismatch");
  }
  if (!(gamma > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "suboptimal_feedback_single: gamma must be > 0");
  }
  if (!is_standard_form(c, d)) {
    throw Error(ErrorCode::NotStandardForm,
                "suboptimal_feedback_single: requires D'C = 0 and D'D = I");
  }

  const Matrix q = c.transpose() * c;
  const Matrix p = solve_riccati(a, b, q, default_eps(q));
  const double trace = (e.transpose() * p * e).trace();
  if (!(gamma - trace > 1e-12 * gamma)) {
    throw Error(ErrorCode::GammaInfeasible,
                "suboptimal_feedback_single: achieved trace " + std::to_string(trace) +
                    " does not beat gamma " + std::to_string(gamma),
                trace);
  }

  FeedbackDesign out;
  out.K = -(b.transpose() * p).eval();

  PerformanceTriple closed{a + b * out.K, c + d * out.K, e};
  const CertifyOutcome check = certify_cost(closed, p, gamma);
  if (!check.accepted()) {
    throw Error(ErrorCode::NoConvergence,
                "suboptimal_feedback_single: designed certificate failed verification");
  }
  out.certificate = check.certificate;
  return out;
}

}  // namespace disth2
