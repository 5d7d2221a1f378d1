#include "disth2/matkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace disth2 {

namespace {

void require_square_finite(const Matrix& m, const char* name) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(name) + " must be square and nonempty");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidInput,
                std::string(name) + " has non-finite entries");
  }
}

}  // namespace

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_symmetric(const Matrix& s, double tol) {
  if (s.rows() != s.cols()) return false;
  return max_abs(s - s.transpose()) <= tol;
}

SymEig sym_eig(const Matrix& s) {
  require_square_finite(s, "S");
  const Eigen::Index n = s.rows();
  if (!is_symmetric(s, 1e-12 * std::max(1.0, max_abs(s)))) {
    throw Error(ErrorCode::NonSymmetric, "sym_eig: input is not symmetric");
  }

  Matrix a = 0.5 * (s + s.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double norm_f = a.norm();

  auto off_mass = [&]() {
    double acc = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) acc += a(p, q) * a(p, q);
    return std::sqrt(2.0 * acc);
  };

  bool converged = (norm_f == 0.0) || (off_mass() <= 1e-14 * norm_f);
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - sn * arq;
          a(p, r) = a(r, p);
          a(r, q) = sn * arp + c * arq;
          a(q, r) = a(r, q);
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - sn * vrq;
          v(r, q) = sn * vrp + c * vrq;
        }
      }
    }
    converged = off_mass() <= 1e-14 * norm_f;
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence, "sym_eig: Jacobi sweep cap reached");
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SymEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
    out.eigenvectors.col(k) = v.col(order[static_cast<size_t>(k)]);
  }
  return out;
}

Matrix solve_lyapunov(const Matrix& abar, const Matrix& q) {
  require_square_finite(abar, "Abar");
  require_square_finite(q, "Q");
  const Eigen::Index n = abar.rows();
  if (q.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "solve_lyapunov: Q size mismatch");
  }
  const Matrix qs = 0.5 * (q + q.transpose());

  // vec(Abar' Y + Y Abar) = (I (x) Abar' + Abar' (x) I) vec(Y), column-major vec.
  const Matrix at = abar.transpose();
  Matrix system = kron(Matrix::Identity(n, n), at) + kron(at, Matrix::Identity(n, n));

  Eigen::Map<const Vector> q_vec(qs.data(), n * n);
  Eigen::PartialPivLU<Matrix> lu(system);
  if (lu.rcond() < 1e-13) {
    throw Error(ErrorCode::SingularLyapunov,
                "solve_lyapunov: vectorized system is numerically singular "
                "(eigenvalue pair of Abar sums to ~0)");
  }
  Vector y_vec = lu.solve(-q_vec);
  if (!y_vec.allFinite()) {
    throw Error(ErrorCode::SingularLyapunov,
                "solve_lyapunov: non-finite solution from singular system");
  }

  Matrix y = Eigen::Map<Matrix>(y_vec.data(), n, n);
  y = 0.5 * (y + y.transpose()).eval();

  const double residual = max_abs(at * y + y * abar + qs);
  if (residual > 1e-9 * std::max(1.0, max_abs(qs))) {
    throw Error(ErrorCode::SingularLyapunov,
                "solve_lyapunov: residual " + std::to_string(residual) +
                    " exceeds tolerance; system is near-singular");
  }
  return y;
}

bool is_hurwitz(const Matrix& a) {
  require_square_finite(a, "A");
  Matrix y;
  try {
    y = solve_lyapunov(a, Matrix::Identity(a.rows(), a.cols()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingularLyapunov) return false;
    throw;
  }
  const SymEig se = sym_eig(y);
  const double largest = se.eigenvalues.cwiseAbs().maxCoeff();
  if (largest == 0.0) return false;
  return se.eigenvalues.minCoeff() > 1e-10 * largest;
}

Matrix expm(const Matrix& a, double t) {
  require_square_finite(a, "A");
  if (!std::isfinite(t)) {
    throw Error(ErrorCode::InvalidInput, "expm: t is not finite");
  }
  const Eigen::Index n = a.rows();
  Matrix m = a * t;

  static const double pade[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const double theta13 = 5.371920351148152;

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    m /= std::pow(2.0, squarings);
  }

  const Matrix ident = Matrix::Identity(n, n);
  const Matrix m2 = m * m;
  const Matrix m4 = m2 * m2;
  const Matrix m6 = m2 * m4;

  const Matrix u = m * (m6 * (pade[13] * m6 + pade[11] * m4 + pade[9] * m2) +
                        pade[7] * m6 + pade[5] * m4 + pade[3] * m2 + pade[1] * ident);
  const Matrix v = m6 * (pade[12] * m6 + pade[10] * m4 + pade[8] * m2) +
                   pade[6] * m6 + pade[4] * m4 + pade[2] * m2 + pade[0] * ident;

  Matrix f = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) f = (f * f).eval();
  return f;
}

double default_eps(const Matrix& q) { return 1e-6 * std::max(1.0, max_abs(q)); }

namespace {

// Bass-type stabilizing gain: pick beta above the max row-sum norm of A,
// solve (A + beta I) Z + Z (A + beta I)' = 2 Bt Bt', gain K0 = -Bt' Z^{-1}.
Matrix initial_stabilizing_gain(const Matrix& a, const Matrix& bt) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = bt.cols();
  if (is_hurwitz(a)) return Matrix::Zero(m, n);

  const double beta = 1.0 + a.cwiseAbs().rowwise().sum().maxCoeff();
  const Matrix shifted_t = (a + beta * Matrix::Identity(n, n)).transpose();
  const Matrix gram_rhs = -2.0 * bt * bt.transpose();
  const Matrix z = solve_lyapunov(shifted_t, gram_rhs);

  // Z is singular exactly when (A, Bt) is uncontrollable; a small ridge still
  // yields a stabilizing gain when the uncontrollable modes are stable.
  const double z_scale = std::max(1.0, max_abs(z));
  for (double ridge : {0.0, 1e-12, 1e-9, 1e-6}) {
    const Matrix zr = z + ridge * z_scale * Matrix::Identity(n, n);
    Eigen::PartialPivLU<Matrix> lu(zr);
    if (lu.rcond() < 1e-14) continue;
    const Matrix k0 = -(lu.solve(bt)).transpose();
    if (k0.allFinite() && is_hurwitz(a + bt * k0)) return k0;
  }
  throw Error(ErrorCode::NotStabilizable,
              "solve_riccati: no stabilizing initial gain found; (A, Bt) "
              "appears not stabilizable");
}

}  // namespace

Matrix solve_riccati(const Matrix& a, const Matrix& bt, const Matrix& q, double eps) {
  require_square_finite(a, "A");
  require_square_finite(q, "Q");
  const Eigen::Index n = a.rows();
  if (bt.rows() != n || bt.cols() == 0 || !bt.allFinite()) {
    throw Error(ErrorCode::DimensionMismatch, "solve_riccati: Bt size mismatch");
  }
  if (q.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "solve_riccati: Q size mismatch");
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::InvalidInput, "solve_riccati: eps must be >= 0");
  }
  {
    const SymEig qe = sym_eig(0.5 * (q + q.transpose()));
    const double largest = qe.eigenvalues.cwiseAbs().maxCoeff();
    if (qe.eigenvalues.minCoeff() < -1e-9 * std::max(1.0, largest)) {
      throw Error(ErrorCode::InvalidInput, "solve_riccati: Q is not positive semidefinite");
    }
  }

  const Matrix q_eff = 0.5 * (q + q.transpose()) + eps * Matrix::Identity(n, n);
  const double res_target = 1e-12 * std::max(1.0, max_abs(q_eff));
  const double res_accept = 1e-9 * std::max(1.0, max_abs(q) + eps);

  Matrix k = initial_stabilizing_gain(a, bt);
  Matrix p = Matrix::Zero(n, n);
  Matrix best_p;
  double best_res = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < 100; ++iter) {
    const Matrix a_cl = a + bt * k;
    try {
      p = solve_lyapunov(a_cl, q_eff + k.transpose() * k);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularLyapunov) {
        throw Error(ErrorCode::NoConvergence,
                    "solve_riccati: Newton step lost stability");
      }
      throw;
    }
    k = -(bt.transpose() * p).eval();

    const Matrix pb = p * bt;
    const double residual =
        max_abs(a.transpose() * p + p * a - pb * pb.transpose() + q_eff);
    if (residual < best_res) {
      best_res = residual;
      best_p = p;
    }
    if (residual <= res_target) break;
  }

  if (best_res > res_accept) {
    throw Error(ErrorCode::NoConvergence,
                "solve_riccati: Newton residual " + std::to_string(best_res) +
                    " above tolerance after iteration cap");
  }

  Matrix p_out = 0.5 * (best_p + best_p.transpose());
  const SymEig pe = sym_eig(p_out);
  const double largest = pe.eigenvalues.cwiseAbs().maxCoeff();
  if (pe.eigenvalues.minCoeff() < -1e-8 * std::max(1.0, largest)) {
    throw Error(ErrorCode::NoConvergence,
                "solve_riccati: converged to an indefinite solution");
  }
  if (!is_hurwitz(a - bt * bt.transpose() * p_out)) {
    throw Error(ErrorCode::NoConvergence,
                "solve_riccati: converged solution is not stabilizing");
  }
  return p_out;
}

}  // namespace disth2
