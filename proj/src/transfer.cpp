#include "compet/transfer.hpp"

namespace compet {

namespace {

bool causal_side(Causality c) {
    return c == Causality::causal || c == Causality::strictly_causal;
}

} // namespace

ComplexMatrix TransferRealization::eval(std::complex<double> z) const {
    const std::complex<double> v = causal_side(causality) ? z : 1.0 / z;
    ComplexMatrix out = D.cast<std::complex<double>>();
    if (A.rows() > 0) {
        ComplexMatrix M =
            v * ComplexMatrix::Identity(A.rows(), A.rows()) - A.cast<std::complex<double>>();
        out += C.cast<std::complex<double>>() *
               M.partialPivLu().solve(B.cast<std::complex<double>>());
    }
    return out;
}

TransferRealization TransferRealization::constant(const Matrix& D, Causality c) {
    TransferRealization t;
    t.A = Matrix(0, 0);
    t.B = Matrix(0, D.cols());
    t.C = Matrix(D.rows(), 0);
    t.D = D;
    t.causality = c;
    return t;
}

TransferRealization TransferRealization::causal_ss(const Matrix& A, const Matrix& B,
                                                   const Matrix& C, const Matrix& D) {
    return {A, B, C, D, Causality::causal};
}

TransferRealization TransferRealization::strictly_causal_ss(const Matrix& A, const Matrix& B,
                                                            const Matrix& C) {
    return {A, B, C, Matrix::Zero(C.rows(), B.cols()), Causality::strictly_causal};
}

TransferRealization TransferRealization::anticausal_ss(const Matrix& A, const Matrix& B,
                                                       const Matrix& C, const Matrix& D) {
    Causality c = D.isZero(0.0) ? Causality::strictly_anticausal : Causality::anticausal;
    return {A, B, C, D, c};
}

TransferRealization TransferRealization::product(const TransferRealization& rhs) const {
    if (causal_side(causality) != causal_side(rhs.causality))
        throw DimensionMismatch("TransferRealization::product: mixed causality sides");
    if (inputs() != rhs.outputs())
        throw DimensionMismatch("TransferRealization::product: dimension mismatch");
    const Eigen::Index n1 = order(), n2 = rhs.order();
    TransferRealization out;
    out.A = Matrix::Zero(n1 + n2, n1 + n2);
    out.A.topLeftCorner(n1, n1) = A;
    out.A.topRightCorner(n1, n2) = B * rhs.C;
    out.A.bottomRightCorner(n2, n2) = rhs.A;
    out.B = Matrix::Zero(n1 + n2, rhs.inputs());
    out.B.topRows(n1) = B * rhs.D;
    out.B.bottomRows(n2) = rhs.B;
    out.C = Matrix::Zero(outputs(), n1 + n2);
    out.C.leftCols(n1) = C;
    out.C.rightCols(n2) = D * rhs.C;
    out.D = D * rhs.D;
    const bool strict = causality == Causality::strictly_causal ||
                        rhs.causality == Causality::strictly_causal ||
                        causality == Causality::strictly_anticausal ||
                        rhs.causality == Causality::strictly_anticausal;
    out.causality = causal_side(causality)
                        ? (strict ? Causality::strictly_causal : Causality::causal)
                        : (strict ? Causality::strictly_anticausal : Causality::anticausal);
    return out;
}

TransferRealization TransferRealization::sum(const TransferRealization& rhs) const {
    if (causal_side(causality) != causal_side(rhs.causality))
        throw DimensionMismatch("TransferRealization::sum: mixed causality sides");
    if (inputs() != rhs.inputs() || outputs() != rhs.outputs())
        throw DimensionMismatch("TransferRealization::sum: dimension mismatch");
    const Eigen::Index n1 = order(), n2 = rhs.order();
    TransferRealization out;
    out.A = Matrix::Zero(n1 + n2, n1 + n2);
    out.A.topLeftCorner(n1, n1) = A;
    out.A.bottomRightCorner(n2, n2) = rhs.A;
    out.B = Matrix::Zero(n1 + n2, inputs());
    out.B.topRows(n1) = B;
    out.B.bottomRows(n2) = rhs.B;
    out.C = Matrix::Zero(outputs(), n1 + n2);
    out.C.leftCols(n1) = C;
    out.C.rightCols(n2) = rhs.C;
    out.D = D + rhs.D;
    const bool strict = out.D.isZero(0.0) && causality != Causality::causal &&
                        rhs.causality != Causality::causal;
    out.causality = causal_side(causality)
                        ? (strict ? Causality::strictly_causal : Causality::causal)
                        : (strict ? Causality::strictly_anticausal : Causality::anticausal);
    return out;
}

TransferRealization TransferRealization::inverse() const {
    if (outputs() != inputs())
        throw DimensionMismatch("TransferRealization::inverse: square feedthrough required");
    Eigen::PartialPivLU<Matrix> lu(D);
    if (std::abs(lu.determinant()) < 1e-300)
        throw Singular("TransferRealization::inverse: singular feedthrough");
    const Matrix Dinv = lu.inverse();
    TransferRealization out;
    out.A = A - B * Dinv * C;
    out.B = B * Dinv;
    out.C = -Dinv * C;
    out.D = Dinv;
    out.causality = causal_side(causality) ? Causality::causal : Causality::anticausal;
    return out;
}

std::vector<Matrix> TransferRealization::impulse(int taps) const {
    std::vector<Matrix> h;
    h.reserve(static_cast<size_t>(taps));
    h.push_back(D);
    Matrix Ak = Matrix::Identity(order(), order());
    for (int k = 1; k < taps; ++k) {
        h.push_back(C * Ak * B);
        Ak = A * Ak;
    }
    return h;
}

} // namespace compet
