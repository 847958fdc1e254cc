#pragma once

#include <complex>

#include "compet/numerics.hpp"

namespace compet {

enum class Causality { causal, strictly_causal, anticausal, strictly_anticausal };

/// State-space quadruple for a rational transfer function on the unit circle.
/// Causal flavors realize C (zI - A)^{-1} B + D; anticausal flavors realize
/// C (z^{-1}I - A)^{-1} B + D, i.e. a causal realization in the conjugate
/// variable, so a single evaluation kernel serves both directions.
struct TransferRealization {
    Matrix A, B, C, D;
    Causality causality = Causality::causal;

    Eigen::Index outputs() const { return D.rows(); }
    Eigen::Index inputs() const { return D.cols(); }
    Eigen::Index order() const { return A.rows(); }

    ComplexMatrix eval(std::complex<double> z) const;
    ComplexMatrix eval_omega(double omega) const { return eval(std::polar(1.0, omega)); }

    static TransferRealization constant(const Matrix& D,
                                        Causality c = Causality::causal);
    static TransferRealization causal_ss(const Matrix& A, const Matrix& B, const Matrix& C,
                                         const Matrix& D);
    static TransferRealization strictly_causal_ss(const Matrix& A, const Matrix& B,
                                                  const Matrix& C);
    static TransferRealization anticausal_ss(const Matrix& A, const Matrix& B, const Matrix& C,
                                             const Matrix& D);

    /// Series product (*this applied after rhs); both must be causal-side.
    TransferRealization product(const TransferRealization& rhs) const;
    TransferRealization sum(const TransferRealization& rhs) const;
    /// Inverse of a causal realization with invertible feedthrough.
    TransferRealization inverse() const;

    /// First `taps` Markov parameters (impulse response coefficients of the
    /// stored causal-side variable).
    std::vector<Matrix> impulse(int taps) const;
};

} // namespace compet
