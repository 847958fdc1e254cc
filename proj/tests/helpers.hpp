#pragma once

#include <random>

#include "compet/model.hpp"
#include "compet/numerics.hpp"

namespace testutil {

using compet::LtiSystem;
using compet::Matrix;

// Deterministic generator; raw mt19937_64 output only, so sequences are
// identical across standard libraries.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double unit() { // uniform in [0, 1)
        return static_cast<double>(gen() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    Matrix matrix(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
        Matrix M(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) M(i, j) = scale * (2.0 * unit() - 1.0);
        return M;
    }

    Matrix spd(Eigen::Index n, double lo = 0.3, double hi = 3.0) {
        const Matrix L = matrix(n, n);
        Matrix M = L * L.transpose();
        M += lo * Matrix::Identity(n, n);
        const double s = uniform(1.0, hi);
        return s * M / std::max(1.0, M.norm() / n);
    }
};

inline Matrix stable_matrix(Rng& rng, Eigen::Index n, double radius) {
    Matrix A = rng.matrix(n, n);
    const double rho = compet::spectral_radius(A);
    if (rho > 1e-12) A *= radius / rho;
    return A;
}

// Random plant passing the standing assumptions. Spectral radius of A is
// drawn away from 1 on both sides when allow_unstable is set.
inline LtiSystem random_system(Rng& rng, Eigen::Index n, Eigen::Index p, Eigen::Index m,
                               bool allow_unstable = true) {
    LtiSystem sys;
    sys.name = "random";
    double radius = rng.uniform(0.2, 0.9);
    if (allow_unstable && rng.unit() < 0.5) radius = rng.uniform(1.1, 1.6);
    sys.A = stable_matrix(rng, n, radius);
    sys.B_u = rng.matrix(n, p);
    for (int tries = 0; tries < 50; ++tries) {
        sys.B_w = rng.matrix(n, m);
        Eigen::JacobiSVD<Matrix> svd(sys.B_w);
        if (svd.singularValues()(svd.singularValues().size() - 1) > 0.05) break;
    }
    sys.Q = rng.spd(n);
    sys.R = rng.spd(p);
    return sys;
}

// Dense Kronecker-product solve of X = A X B + C, the small-size oracle for
// the doubling-based solvers.
inline Matrix kron_sylvester(const Matrix& A, const Matrix& B, const Matrix& C) {
    const Eigen::Index n = C.rows(), m = C.cols();
    Matrix K = Matrix::Identity(n * m, n * m);
    // vec(A X B) = (B' kron A) vec(X)
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            K.block(i * n, j * n, n, n) -= B(j, i) * A;
    Eigen::VectorXd vecC(n * m);
    for (Eigen::Index j = 0; j < m; ++j) vecC.segment(j * n, n) = C.col(j);
    const Eigen::VectorXd vecX = K.partialPivLu().solve(vecC);
    Matrix X(n, m);
    for (Eigen::Index j = 0; j < m; ++j) X.col(j) = vecX.segment(j * n, n);
    return X;
}

inline Matrix kron_dlyap(const Matrix& A, const Matrix& W) {
    return kron_sylvester(A, A.transpose(), W);
}

inline LtiSystem scalar_example() {
    LtiSystem sys;
    sys.name = "scalar_example";
    sys.A = Matrix::Constant(1, 1, 0.5);
    sys.B_u = Matrix::Constant(1, 1, 1.0);
    sys.B_w = Matrix::Constant(1, 1, 1.0);
    sys.Q = Matrix::Constant(1, 1, 1.0);
    sys.R = Matrix::Constant(1, 1, 1.0);
    return sys;
}

// Riccati solution of the scalar running example, from the quadratic
// P^2 - 0.25 P - 1 = 0.
inline double scalar_example_P() { return (0.25 + std::sqrt(4.0625)) / 2.0; }

} // namespace testutil
