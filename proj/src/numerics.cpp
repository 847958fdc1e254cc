#include "compet/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace compet {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw DimensionMismatch(what);
}

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P) {
    const Matrix S = R + B.transpose() * P * B;
    const Matrix rhs = A.transpose() * P * A + Q -
                       A.transpose() * P * B * S.ldlt().solve(B.transpose() * P * A);
    return relative_residual(P, rhs);
}

Matrix dare_closed_loop(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P) {
    const Matrix S = R + B.transpose() * P * B;
    return A - B * S.ldlt().solve(B.transpose() * P * A);
}

// Structure-preserving doubling; returns false on breakdown instead of throwing
// so the caller can fall back to iteration.
bool sda(const Matrix& A, const Matrix& G0, const Matrix& Q, int max_iterations, double tolerance,
         Matrix& out) {
    Matrix E = A;
    Matrix G = G0;
    Matrix H = symmetrize(Q);
    const Eigen::Index n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    for (int it = 0; it < max_iterations; ++it) {
        const Matrix IGH = I + G * H;
        Eigen::PartialPivLU<Matrix> lu(IGH);
        if (std::abs(lu.determinant()) < 1e-300) return false;
        const Matrix W1 = lu.solve(E);        // (I+GH)^{-1} E
        const Matrix W2 = lu.solve(G);        // (I+GH)^{-1} G (used transposed below)
        const Matrix Enext = E * W1;
        const Matrix Gnext = symmetrize(G + E * W2.transpose() * E.transpose());
        const Matrix Hnext = symmetrize(H + W1.transpose() * H * E);
        const double step = (Hnext - H).norm();
        E = Enext;
        G = Gnext;
        H = Hnext;
        if (!H.allFinite()) return false;
        if (step <= tolerance * std::max(1.0, H.norm()) && it >= 1) {
            out = H;
            return true;
        }
    }
    out = H;
    return H.allFinite();
}

} // namespace

double relative_residual(const Matrix& lhs, const Matrix& rhs) {
    return (lhs - rhs).norm() / std::max(1.0, lhs.norm());
}

double spectral_radius(const Matrix& A) {
    if (A.rows() == 0) return 0.0;
    return A.eigenvalues().cwiseAbs().maxCoeff();
}

double sigma_max(const ComplexMatrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    return M.jacobiSvd().singularValues()(0);
}

double sigma_min(const ComplexMatrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    const auto sv = M.jacobiSvd().singularValues();
    return sv(sv.size() - 1);
}

double lambda_max_hermitian(const ComplexMatrix& H) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (H + H.adjoint()),
                                                    Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

Matrix psd_sqrt(const Matrix& X) {
    require(X.rows() == X.cols(), "psd_sqrt: square matrix expected");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(X));
    Vector ev = es.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-10 * scale) throw NotPsd("psd_sqrt: matrix has a negative eigenvalue");
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix psd_inv_sqrt(const Matrix& X) {
    require(X.rows() == X.cols(), "psd_inv_sqrt: square matrix expected");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(X));
    Vector ev = es.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) <= 1e-14 * std::max(scale, 1.0))
            throw NotPd("psd_inv_sqrt: matrix is not positive definite");
        ev(i) = 1.0 / std::sqrt(ev(i));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double lambda_max_pair(const Matrix& Z, const Matrix& P) {
    require(Z.rows() == Z.cols() && P.rows() == P.cols() && Z.rows() == P.rows(),
            "lambda_max_pair: matching square matrices expected");
    const Matrix Ph = psd_sqrt(P);
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(Ph * Z * Ph), Eigen::EigenvaluesOnly);
    const double lam = es.eigenvalues().maxCoeff();
    return std::max(lam, 0.0);
}

Matrix solve_dlyap(const Matrix& A, const Matrix& W, const SolverOptions& opts) {
    require(A.rows() == A.cols() && W.rows() == W.cols() && A.rows() == W.rows(),
            "solve_dlyap: matching square matrices expected");
    if (spectral_radius(A) >= 1.0)
        throw UnstableCoefficient("solve_dlyap: coefficient has spectral radius >= 1");
    Matrix X = symmetrize(W);
    Matrix Ak = A;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Matrix inc = Ak * X * Ak.transpose();
        X = symmetrize(X + inc);
        Ak = Ak * Ak;
        if (inc.norm() <= 0.25 * opts.tolerance * std::max(1.0, X.norm()) &&
            Ak.norm() * X.norm() * Ak.norm() <= 0.25 * opts.tolerance * std::max(1.0, X.norm()))
            break;
    }
    return X;
}

Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C,
                       const SolverOptions& opts) {
    require(A.rows() == A.cols() && B.rows() == B.cols() && C.rows() == A.rows() &&
                C.cols() == B.rows(),
            "solve_sylvester: inconsistent dimensions");
    if (spectral_radius(A) * spectral_radius(B) >= 1.0)
        throw UnstableProduct("solve_sylvester: rho(A) rho(B) >= 1");
    Matrix U = C;
    Matrix Ak = A;
    Matrix Bk = B;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Matrix inc = Ak * U * Bk;
        U += inc;
        Ak = Ak * Ak;
        Bk = Bk * Bk;
        if (inc.norm() <= 0.25 * opts.tolerance * std::max(1.0, U.norm()) &&
            Ak.norm() * Bk.norm() <= 1e-2)
            break;
    }
    return U;
}

Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                  const SolverOptions& opts) {
    const Eigen::Index n = A.rows();
    require(A.cols() == n && B.rows() == n && Q.rows() == n && Q.cols() == n &&
                R.rows() == B.cols() && R.cols() == B.cols(),
            "solve_dare: inconsistent dimensions");

    Matrix P;
    bool ok = false;
    if (B.cols() == 0 || B.norm() == 0.0) {
        // Quadratic term vanishes; plain Stein equation in A'.
        P = solve_dlyap(A.transpose(), Q, opts);
        ok = true;
    } else {
        Eigen::LDLT<Matrix> Rf(R);
        if (Rf.info() != Eigen::Success || !Rf.isPositive())
            throw NotPd("solve_dare: R must be positive definite");
        const Matrix G0 = B * Rf.solve(B.transpose());
        ok = sda(A, G0, Q, opts.max_iterations, opts.tolerance, P);
    }

    if (!ok || dare_residual(A, B, Q, R, P) > 100 * opts.tolerance) {
        // Fallback: Riccati difference iteration to get a stabilizing gain,
        // then Hewer (Newton) steps to polish.
        P = symmetrize(Q);
        for (int it = 0; it < 200 * opts.max_iterations; ++it) {
            const Matrix S = R + B.transpose() * P * B;
            const Matrix Pn = symmetrize(
                Q + A.transpose() * P * A -
                A.transpose() * P * B * S.ldlt().solve(B.transpose() * P * A));
            const double step = (Pn - P).norm();
            P = Pn;
            if (!P.allFinite())
                throw NoStabilizingSolution("solve_dare: iteration diverged");
            if (step <= 1e-8 * std::max(1.0, P.norm())) break;
        }
        for (int it = 0; it < 20; ++it) {
            const Matrix S = R + B.transpose() * P * B;
            const Matrix K = S.ldlt().solve(B.transpose() * P * A);
            const Matrix Acl = A - B * K;
            if (spectral_radius(Acl) >= 1.0)
                throw NoStabilizingSolution("solve_dare: no stabilizing iterate found");
            P = solve_dlyap(Acl.transpose(), Q + K.transpose() * R * K, opts);
            if (dare_residual(A, B, Q, R, P) <= opts.tolerance) break;
        }
    }

    P = symmetrize(P);
    if (!P.allFinite() || dare_residual(A, B, Q, R, P) > 100 * opts.tolerance)
        throw NoStabilizingSolution("solve_dare: residual did not converge");
    if (B.norm() != 0.0 && spectral_radius(dare_closed_loop(A, B, R, P)) >= 1.0)
        throw NoStabilizingSolution("solve_dare: closed loop not stable");
    return P;
}

Matrix solve_dare_indefinite(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                             const SolverOptions& opts) {
    const Eigen::Index n = A.rows();
    require(A.cols() == n && B.rows() == n && Q.rows() == n && Q.cols() == n &&
                R.rows() == B.cols() && R.cols() == B.cols(),
            "solve_dare_indefinite: inconsistent dimensions");
    Eigen::PartialPivLU<Matrix> Rf(R);
    if (std::abs(Rf.determinant()) < 1e-300)
        throw NoStabilizingSolution("solve_dare_indefinite: singular weight");
    const Matrix G0 = B * Rf.solve(B.transpose());
    Matrix P;
    if (!sda(A, symmetrize(G0), Q, opts.max_iterations, opts.tolerance, P))
        throw NoStabilizingSolution("solve_dare_indefinite: doubling broke down");
    P = symmetrize(P);
    const Matrix S = R + B.transpose() * P * B;
    Eigen::PartialPivLU<Matrix> Sf(S);
    if (std::abs(Sf.determinant()) < 1e-300)
        throw NoStabilizingSolution("solve_dare_indefinite: singular inner block");
    const Matrix Acl = A - B * Sf.solve(B.transpose() * P * A);
    if (!P.allFinite() || spectral_radius(Acl) >= 1.0)
        throw NoStabilizingSolution("solve_dare_indefinite: closed loop not stable");
    const Matrix rhs =
        A.transpose() * P * A + Q - A.transpose() * P * B * Sf.solve(B.transpose() * P * A);
    if (relative_residual(P, rhs) > 1e4 * opts.tolerance)
        throw NoStabilizingSolution("solve_dare_indefinite: residual did not converge");
    return P;
}

} // namespace compet
