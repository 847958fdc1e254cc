#include "compet/pipeline.hpp"

#include <cmath>

namespace compet {

namespace {

void require_normalized(const LtiSystem& sys, const char* where) {
    const Matrix I = Matrix::Identity(sys.p(), sys.p());
    if ((sys.R - I).norm() > 1e-9)
        throw DimensionMismatch(std::string(where) + ": expects an R-normalized system");
}

Matrix pinv_full_column(const Matrix& B) {
    return (B.transpose() * B).ldlt().solve(B.transpose());
}

} // namespace

TransferRealization build_F(const LtiSystem& sys) {
    return TransferRealization::strictly_causal_ss(sys.A, sys.B_u, psd_sqrt(symmetrize(sys.Q)));
}

TransferRealization build_G(const LtiSystem& sys) {
    return TransferRealization::strictly_causal_ss(sys.A, sys.B_w, psd_sqrt(symmetrize(sys.Q)));
}

DeltaFactor factor_delta(const LtiSystem& sys, const SolverOptions& opts) {
    require_normalized(sys, "factor_delta");
    DeltaFactor f;
    try {
        f.P = solve_dare(sys.A, sys.B_u, symmetrize(sys.Q),
                         Matrix::Identity(sys.p(), sys.p()), opts);
    } catch (const Error& e) {
        throw RiccatiFailure(std::string("factor_delta: ") + e.what());
    }
    const Matrix Ru = Matrix::Identity(sys.p(), sys.p()) +
                      sys.B_u.transpose() * f.P * sys.B_u;
    f.K_lqr = Ru.ldlt().solve(sys.B_u.transpose() * f.P * sys.A);
    f.A_K = sys.A - sys.B_u * f.K_lqr;
    f.Lambda = Ru.ldlt().solve(sys.B_u.transpose());
    f.root = psd_sqrt(Ru);
    f.root_inv = psd_inv_sqrt(Ru);
    f.delta = TransferRealization::causal_ss(sys.A, sys.B_u, f.root * f.K_lqr, f.root);
    f.delta_inv =
        TransferRealization::causal_ss(f.A_K, sys.B_u * f.root_inv, -f.K_lqr, f.root_inv);
    return f;
}

NablaFactor factor_nabla(const LtiSystem& sys, const DeltaFactor& delta,
                         const SolverOptions& opts) {
    require_normalized(sys, "factor_nabla");
    const Matrix Qh = psd_sqrt(symmetrize(sys.Q));
    NablaFactor f;
    // Dual Riccati solved through the closed-loop Lyapunov route.
    const Matrix Ru = Matrix::Identity(sys.p(), sys.p()) +
                      sys.B_u.transpose() * delta.P * sys.B_u;
    const Matrix W = sys.B_u * Ru.ldlt().solve(sys.B_u.transpose());
    const Matrix O = solve_dlyap(delta.A_K, W, opts);
    const Eigen::Index n = sys.n();
    Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - delta.P * O);
    if (std::abs(lu.determinant()) < 1e-300)
        throw RiccatiFailure("factor_nabla: I - P O singular");
    f.T = symmetrize(O * lu.inverse());
    f.R_T = symmetrize(Matrix::Identity(n, n) + Qh * f.T * Qh);
    Eigen::LDLT<Matrix> RTf(f.R_T);
    f.K_T = sys.A * f.T * Qh * RTf.solve(Matrix::Identity(n, n));
    f.A_T = sys.A - f.K_T * Qh;
    f.S = symmetrize(Qh * RTf.solve(Qh));
    if (spectral_radius(f.A_T) >= 1.0)
        throw RiccatiFailure("factor_nabla: A_T not stable");
    const Matrix RTh = psd_sqrt(f.R_T);
    const Matrix RTh_inv = psd_inv_sqrt(f.R_T);
    f.nabla = TransferRealization::causal_ss(sys.A, f.K_T * RTh, Qh, RTh);
    f.nabla_inv = TransferRealization::causal_ss(f.A_T, f.K_T, -RTh_inv * Qh, RTh_inv);
    return f;
}

MFactor factor_M(const LtiSystem& sys, const NablaFactor& nabla, const SolverOptions& opts) {
    require_normalized(sys, "factor_M");
    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    {
        Eigen::JacobiSVD<Matrix> svd(sys.B_w);
        const auto sv = svd.singularValues();
        if (m > n || sv(sv.size() - 1) <= 1e-12 * sv(0))
            throw RankDeficientBw("factor_M: B_w must have full column rank");
    }
    MFactor f;
    f.square = (m == n);
    const Matrix& S = nabla.S;
    if (f.square) {
        // Remark: with a square (hence invertible) B_w the stabilizing Riccati
        // solution is exactly zero.
        f.Mmat = Matrix::Zero(n, n);
        f.R_M = symmetrize(sys.B_w.transpose() * S * sys.B_w);
        f.K_M = f.R_M.ldlt().solve(sys.B_w.transpose() * S * nabla.A_T);
        f.A_M = nabla.A_T - sys.B_w * f.K_M;
    } else {
        // Policy iteration on the gain; K = 0 is stabilizing since A_T is.
        Matrix M = Matrix::Zero(n, n);
        Matrix K = Matrix::Zero(m, n);
        Matrix A_M = nabla.A_T;
        bool converged = false;
        for (int it = 0; it < std::max(opts.max_iterations, 50); ++it) {
            M = solve_dlyap(A_M.transpose(), symmetrize(A_M.transpose() * S * A_M), opts);
            const Matrix R_M = symmetrize(sys.B_w.transpose() * (M + S) * sys.B_w);
            const Matrix Knext =
                R_M.ldlt().solve(sys.B_w.transpose() * (M + S) * nabla.A_T);
            const double step = (Knext - K).norm();
            K = Knext;
            A_M = nabla.A_T - sys.B_w * K;
            if (spectral_radius(A_M) >= 1.0)
                throw RiccatiFailure("factor_M: lost stability during iteration");
            if (step <= opts.tolerance * std::max(1.0, K.norm())) {
                converged = true;
                break;
            }
        }
        if (!converged) throw RiccatiFailure("factor_M: gain iteration did not converge");
        f.Mmat = symmetrize(M);
        f.R_M = symmetrize(sys.B_w.transpose() * (f.Mmat + S) * sys.B_w);
        f.K_M = K;
        f.A_M = A_M;
    }
    const Matrix RMh = psd_sqrt(f.R_M);
    const Matrix RMh_inv = psd_inv_sqrt(f.R_M);
    f.M = TransferRealization::causal_ss(nabla.A_T, sys.B_w, RMh * f.K_M, RMh);
    f.M_inv = TransferRealization::causal_ss(f.A_M, sys.B_w * RMh_inv, -f.K_M, RMh_inv);
    return f;
}

MFactor identity_M(const LtiSystem& sys, const NablaFactor& nabla) {
    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    MFactor f;
    f.square = false;
    f.Mmat = Matrix::Zero(n, n);
    f.R_M = Matrix::Identity(m, m);
    f.K_M = Matrix::Zero(m, n);
    f.A_M = nabla.A_T;
    f.M = TransferRealization::constant(Matrix::Identity(m, m));
    f.M_inv = TransferRealization::constant(Matrix::Identity(m, m));
    return f;
}

ComplexMatrix Decomposition::eval_C1(const MFactor& mf, std::complex<double> z) const {
    return C1_core.eval(z) * mf.M_inv.eval(z);
}

ComplexMatrix Decomposition::eval_target(const MFactor& mf, std::complex<double> z) const {
    return anticausal_part.eval(z) + eval_C1(mf, z) + C2.eval(z);
}

Decomposition decompose(const LtiSystem& sys, const DeltaFactor& delta, const NablaFactor& nabla,
                        const MFactor& mf, const SolverOptions& opts) {
    require_normalized(sys, "decompose");
    Decomposition d;
    d.U = solve_sylvester(delta.A_K.transpose(), mf.A_M, delta.P * sys.B_w * mf.K_M, opts);
    const Matrix RMh_inv = psd_inv_sqrt(mf.R_M);
    const Matrix Sdec = (delta.P - delta.A_K.transpose() * d.U) * sys.B_w * RMh_inv;
    const Matrix Cu = -delta.root_inv * sys.B_u.transpose();
    d.anticausal_part = TransferRealization::anticausal_ss(
        delta.A_K.transpose(), delta.A_K.transpose() * Sdec, Cu, Cu * Sdec);
    d.C1_core = TransferRealization::strictly_causal_ss(
        sys.A, sys.B_w, -delta.root_inv * sys.B_u.transpose() * delta.P * sys.A);
    d.C2 = TransferRealization::strictly_causal_ss(
        mf.A_M, sys.B_w * RMh_inv, delta.root_inv * sys.B_u.transpose() * d.U);
    return d;
}

NehariSolution nehari_solve(const LtiSystem& sys, const DeltaFactor& delta, const MFactor& mf,
                            const Decomposition& dec, const SolverOptions& opts) {
    require_normalized(sys, "nehari_solve");
    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    NehariSolution sol;
    const Matrix Ru = Matrix::Identity(sys.p(), sys.p()) +
                      sys.B_u.transpose() * delta.P * sys.B_u;
    sol.Z1 = solve_dlyap(delta.A_K, sys.B_u * Ru.ldlt().solve(sys.B_u.transpose()), opts);
    const Matrix PU = delta.P - delta.A_K.transpose() * dec.U;
    const Matrix Wpi = PU * sys.B_w * mf.R_M.ldlt().solve(sys.B_w.transpose()) * PU.transpose();
    sol.Pi = solve_dlyap(delta.A_K.transpose(), symmetrize(Wpi), opts);
    sol.value = lambda_max_pair(sol.Z1, sol.Pi);

    const double scale = std::max({sol.Z1.norm() * sol.Pi.norm(), 1e-300});
    if (sol.value <= 1e-13 * std::sqrt(scale) || sol.value <= 1e-300) {
        // Degenerate Hankel operator: best causal approximation is zero.
        sol.value = 0.0;
        sol.Zstar = Matrix::Zero(n, n);
        sol.K_gamma = Matrix::Zero(n, m);
        sol.F_gamma = delta.A_K;
        sol.Kprime = TransferRealization::strictly_causal_ss(
            Matrix::Zero(0, 0), Matrix::Zero(0, m), Matrix::Zero(sys.p(), 0));
        return sol;
    }

    sol.Zstar = sol.Z1 / sol.value;
    const Matrix lhs = Matrix::Identity(n, n) -
                       delta.A_K * sol.Zstar * delta.A_K.transpose() * sol.Pi;
    Eigen::PartialPivLU<Matrix> lu(lhs);
    if (std::abs(lu.determinant()) < 1e-300)
        throw RiccatiFailure("nehari_solve: singular gain system");
    sol.K_gamma = lu.solve(delta.A_K * sol.Zstar * PU * sys.B_w);
    sol.F_gamma =
        delta.A_K - sol.K_gamma * mf.R_M.ldlt().solve(sys.B_w.transpose() * PU.transpose());
    if (spectral_radius(sol.F_gamma) >= 1.0)
        throw RiccatiFailure("nehari_solve: F_gamma not stable");
    sol.Kprime = TransferRealization::strictly_causal_ss(
        sol.F_gamma, sol.K_gamma * psd_inv_sqrt(mf.R_M),
        -delta.root_inv * sys.B_u.transpose() * sol.Pi);
    return sol;
}

AssembledController assemble_controller(const LtiSystem& sys, const DeltaFactor& delta,
                                        const NablaFactor& nabla, const MFactor& mf,
                                        const Decomposition& dec, const NehariSolution& neh) {
    require_normalized(sys, "assemble_controller");
    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    const Eigen::Index p = sys.p();

    Matrix Ac = Matrix::Zero(2 * n, 2 * n);
    Ac.topLeftCorner(n, n) = nabla.A_T;
    Ac.bottomLeftCorner(n, n) = neh.K_gamma * mf.K_M;
    Ac.bottomRightCorner(n, n) = neh.F_gamma;
    Matrix Bc = Matrix::Zero(2 * n, n); // consumes B_w w_t
    Bc.topRows(n) = Matrix::Identity(n, n);
    Bc.bottomRows(n) = neh.K_gamma * pinv_full_column(sys.B_w);
    Matrix Cc = Matrix::Zero(p, 2 * n);
    Cc.leftCols(n) = delta.Lambda * dec.U;
    Cc.rightCols(n) = -delta.Lambda * neh.Pi;
    const Matrix Dx = -delta.K_lqr;

    AssembledController out;
    out.controller = ControllerRealization::from_feedback(sys, Ac, Bc, Cc, Dx);

    // Raw three-block realization, states (xi1, xi2, x).
    Matrix Ar = Matrix::Zero(3 * n, 3 * n);
    Ar.block(0, 0, n, n) = nabla.A_T;
    Ar.block(n, 0, n, n) = neh.K_gamma * mf.K_M;
    Ar.block(n, n, n, n) = neh.F_gamma;
    Ar.block(2 * n, 0, n, n) = sys.B_u * delta.Lambda * dec.U;
    Ar.block(2 * n, n, n, n) = -sys.B_u * delta.Lambda * neh.Pi;
    Ar.block(2 * n, 2 * n, n, n) = delta.A_K;
    Matrix Br = Matrix::Zero(3 * n, m);
    Br.topRows(n) = sys.B_w;
    Br.middleRows(n, n) = neh.K_gamma;
    Br.bottomRows(n) = sys.B_w;
    Matrix Cr = Matrix::Zero(p, 3 * n);
    Cr.leftCols(n) = delta.Lambda * dec.U;
    Cr.middleCols(n, n) = -delta.Lambda * neh.Pi;
    Cr.rightCols(n) = -delta.K_lqr;
    out.raw = TransferRealization::strictly_causal_ss(Ar, Br, Cr);
    return out;
}

WeightedRegretResult weighted_regret_reduce(const LtiSystem& sys, const Matrix& W_s,
                                            const Matrix& W_u, DisturbanceWeight kind,
                                            const Matrix& W_w_static, const SolverOptions& opts) {
    const LtiSystem norm = normalize_r(sys);
    const Eigen::Index n = norm.n();
    const Eigen::Index p = norm.p();
    const Eigen::Index m = norm.m();
    if (W_s.rows() != n || W_s.cols() != n || W_u.rows() != p || W_u.cols() != p)
        throw DimensionMismatch("weighted_regret_reduce: weight dimensions");
    Matrix Wu_inv_half, Ws_half;
    try {
        Ws_half = psd_sqrt(W_s);
        psd_inv_sqrt(W_s); // pd check
        Wu_inv_half = psd_inv_sqrt(W_u);
    } catch (const NotPsd&) {
        throw NotPd("weighted_regret_reduce: weights must be positive definite");
    }

    const Matrix Qh = psd_sqrt(symmetrize(norm.Q));
    LtiSystem mod = norm;
    mod.Q = symmetrize(Qh * W_s * Qh);
    mod.B_u = norm.B_u * Wu_inv_half;
    Matrix Ww_half = Matrix::Identity(m, m);
    if (kind == DisturbanceWeight::static_pd) {
        if (W_w_static.rows() != m || W_w_static.cols() != m)
            throw DimensionMismatch("weighted_regret_reduce: W_w dimensions");
        Ww_half = psd_sqrt(W_w_static);
        mod.B_w = norm.B_w * psd_inv_sqrt(W_w_static);
    } else if (kind != DisturbanceWeight::identity && kind != DisturbanceWeight::clairvoyant) {
        throw UnsupportedWeight("weighted_regret_reduce: unsupported disturbance weight");
    }

    const DeltaFactor delta = factor_delta(mod, opts);
    const NablaFactor nabla = factor_nabla(mod, delta, opts);
    const MFactor mf = (kind == DisturbanceWeight::clairvoyant) ? factor_M(mod, nabla, opts)
                                                                : identity_M(mod, nabla);
    const Decomposition dec = decompose(mod, delta, nabla, mf, opts);
    const NehariSolution neh = nehari_solve(mod, delta, mf, dec, opts);
    AssembledController asm_out = assemble_controller(mod, delta, nabla, mf, dec, neh);

    WeightedRegretResult out;
    out.value = neh.value;
    out.modified = mod;

    // Back-map: u = W_u^{-1/2} u-bar, w-bar = W_w^{1/2} w. The plant blocks of
    // the modified system reproduce the original state trajectory, so the
    // feedback form survives with rescaled output maps.
    ControllerRealization& c = asm_out.controller;
    const Matrix Cc = Wu_inv_half * c.Cc;
    const Matrix Dx = Wu_inv_half * c.Dx;
    Matrix Bc = c.Bc;
    if (kind == DisturbanceWeight::static_pd) {
        // Bc consumes B_w-bar w-bar = B_w w already; nothing to remap.
    }
    out.controller = ControllerRealization::from_feedback(norm, c.Ac, Bc, Cc, Dx);
    return out;
}

} // namespace compet
