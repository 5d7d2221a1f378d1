#pragma once

#include <Eigen/Dense>

#include "disth2/errors.hpp"

namespace disth2 {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymEig {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthogonal, column k pairs with eigenvalues[k]
};

/// Kronecker product, row-major block layout: result block (i,j) is A(i,j)*B.
Matrix kron(const Matrix& a, const Matrix& b);

/// Max-abs entrywise norm; 0 for empty matrices.
double max_abs(const Matrix& m);

bool is_symmetric(const Matrix& s, double tol);

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Converges when the off-diagonal Frobenius mass drops below 1e-14 * ||S||_F,
/// capped at 100 sweeps. Throws NonSymmetric / NoConvergence.
SymEig sym_eig(const Matrix& s);

/// Solves Abar' Y + Y Abar + Q = 0 by vectorization into an n^2 x n^2 linear
/// system with partial-pivot elimination. Returns the symmetrized solution.
/// Throws SingularLyapunov when the vectorized system is numerically singular
/// (some eigenvalue pair of Abar sums to ~0).
Matrix solve_lyapunov(const Matrix& abar, const Matrix& q);

/// Solves A' P + P A - P Bt Bt' P + Q + eps*I = 0 for the stabilizing P >= 0
/// by Newton iteration (one Lyapunov solve per step), initialized with a
/// Bass-type shifted-Lyapunov stabilizing gain. Throws NotStabilizable when
/// no initial stabilizing gain is found, NoConvergence when the iteration cap
/// is hit without meeting the residual tolerance.
Matrix solve_riccati(const Matrix& a, const Matrix& bt, const Matrix& q, double eps);

/// True iff solve_lyapunov(A, I) succeeds and the solution is positive
/// definite. Never throws on stability failures; they map to false.
bool is_hurwitz(const Matrix& a);

/// e^{A t} by scaling-and-squaring with the degree-13 diagonal Pade
/// approximant.
Matrix expm(const Matrix& a, double t = 1.0);

/// Default strictness shift for inequality-to-equality conversions:
/// 1e-6 * max(1, ||Q||_max).
double default_eps(const Matrix& q);

}  // namespace disth2
