#pragma once

#include <Eigen/Dense>

#include "compet/errors.hpp"

namespace compet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct SolverOptions {
    double tolerance = 1e-12; // relative residual bound
    int max_iterations = 200;
};

/// Stabilizing solution of P = A'PA + Q - A'PB (R + B'PB)^{-1} B'PA.
/// Structure-preserving doubling with a Newton fallback.
Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                  const SolverOptions& opts = {});

/// Game-type DARE with sign-indefinite input weight R (e.g. diag(I, -g^2 I)).
/// Returns the stabilizing solution or throws NoStabilizingSolution when the
/// doubling iteration breaks down or the closed loop is not stable.
Matrix solve_dare_indefinite(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                             const SolverOptions& opts = {});

/// X = A X A' + W with rho(A) < 1, W symmetric psd. Smith doubling.
Matrix solve_dlyap(const Matrix& A, const Matrix& W, const SolverOptions& opts = {});

/// U = A U B + C with rho(A) rho(B) < 1. Smith doubling.
Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C,
                       const SolverOptions& opts = {});

/// lambda_max(Z P) for symmetric psd Z, P, computed as lambda_max(P^{1/2} Z P^{1/2}).
double lambda_max_pair(const Matrix& Z, const Matrix& P);

/// Unique symmetric psd square root.
Matrix psd_sqrt(const Matrix& X);

/// Symmetric psd inverse square root; throws NotPd if X is singular.
Matrix psd_inv_sqrt(const Matrix& X);

double spectral_radius(const Matrix& A);

double sigma_max(const ComplexMatrix& M);
double sigma_min(const ComplexMatrix& M);

/// Largest eigenvalue of a Hermitian matrix.
double lambda_max_hermitian(const ComplexMatrix& H);

inline Matrix symmetrize(const Matrix& X) { return 0.5 * (X + X.transpose()); }

/// Relative residual ||X - f(X)|| / max(1, ||X||) helper used by certificates.
double relative_residual(const Matrix& lhs, const Matrix& rhs);

} // namespace compet
