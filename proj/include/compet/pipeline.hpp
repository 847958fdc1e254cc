#pragma once

#include "compet/model.hpp"
#include "compet/transfer.hpp"

namespace compet {

/// F(z) = Q^{1/2} (zI - A)^{-1} B_u, strictly causal.
TransferRealization build_F(const LtiSystem& sys);
/// G(z) = Q^{1/2} (zI - A)^{-1} B_w, strictly causal.
TransferRealization build_G(const LtiSystem& sys);

/// Delta*(z^{-*}) Delta(z) = I + F*(z^{-*}) F(z), Delta and Delta^{-1} causal.
struct DeltaFactor {
    TransferRealization delta;
    TransferRealization delta_inv; // realized over the stable closed loop A_K
    Matrix P;                      // stabilizing LQR Riccati solution
    Matrix K_lqr;
    Matrix A_K;      // A - B_u K_lqr
    Matrix Lambda;   // (I + B_u' P B_u)^{-1} B_u'
    Matrix root;     // (I + B_u' P B_u)^{1/2}
    Matrix root_inv; // (I + B_u' P B_u)^{-1/2}
};
DeltaFactor factor_delta(const LtiSystem& sys, const SolverOptions& opts = {});

/// nabla(z) nabla*(z^{-*}) = I + F(z) F*(z^{-*}).
struct NablaFactor {
    TransferRealization nabla;
    TransferRealization nabla_inv;
    Matrix T; // stabilizing dual Riccati solution, via T = O (I - P O)^{-1}
    Matrix R_T;
    Matrix K_T;
    Matrix A_T;
    Matrix S; // (Q^{-1} + T)^{-1} = Q^{1/2} R_T^{-1} Q^{1/2}
};
NablaFactor factor_nabla(const LtiSystem& sys, const DeltaFactor& delta,
                         const SolverOptions& opts = {});

/// M*(z^{-*}) M(z) = G*(I + F F*)^{-1} G with M and M^{-1} causal.
/// For square B_w the Riccati solution is zero and M reduces to the
/// finite-impulse-response pair of the square case.
struct MFactor {
    TransferRealization M;
    TransferRealization M_inv;
    Matrix Mmat; // Riccati solution (zero in the square case)
    Matrix R_M;
    Matrix K_M;
    Matrix A_M;
    bool square = false;
};
MFactor factor_M(const LtiSystem& sys, const NablaFactor& nabla, const SolverOptions& opts = {});

/// Identity disturbance factor used by the plain regret reduction: the same
/// assembly machinery with M(z) = I.
MFactor identity_M(const LtiSystem& sys, const NablaFactor& nabla);

/// Splits Delta K0 M^{-1} = -Delta^{-*} F* G M^{-1} into its anticausal part
/// A(z) (diagonal included) and strictly causal parts C1, C2. C1 is kept in
/// factored form C1 = C1_core(z) * M^{-1}(z).
struct Decomposition {
    TransferRealization anticausal_part; // A(z)
    TransferRealization C1_core;         // -(I+Bu'PBu)^{-1/2} Bu' P A (zI-A)^{-1} B_w
    TransferRealization C2;
    Matrix U; // Sylvester solution U = A_K' U A_M + P B_w K_M
    ComplexMatrix eval_C1(const MFactor& mf, std::complex<double> z) const;
    ComplexMatrix eval_target(const MFactor& mf, std::complex<double> z) const; // A+C1+C2
};
Decomposition decompose(const LtiSystem& sys, const DeltaFactor& delta, const NablaFactor& nabla,
                        const MFactor& mf, const SolverOptions& opts = {});

/// State-space Nehari solution for the strictly anticausal target z A(z).
struct NehariSolution {
    TransferRealization Kprime; // strictly causal optimal approximant
    double value = 0.0;         // lambda_max(Z1 Pi); optimal ratio is 1 + value
    Matrix Z1, Zstar, Pi, K_gamma, F_gamma;
};
NehariSolution nehari_solve(const LtiSystem& sys, const DeltaFactor& delta, const MFactor& mf,
                            const Decomposition& dec, const SolverOptions& opts = {});

/// Assembles K = Delta^{-1} (K' + C1 + C2) M as in the reduced two-state form
/// plus the raw three-block transfer realization.
struct AssembledController {
    ControllerRealization controller; // reduced feedback + transfer forms
    TransferRealization raw;          // unreduced three-block realization
};
AssembledController assemble_controller(const LtiSystem& sys, const DeltaFactor& delta,
                                        const NablaFactor& nabla, const MFactor& mf,
                                        const Decomposition& dec, const NehariSolution& neh);

enum class DisturbanceWeight { identity, clairvoyant, static_pd };

/// Generalized regret reduction with static state/input weights and the named
/// disturbance-weight presets. Returns the optimal value of the reduced
/// Nehari instance and the back-mapped controller (transfer form).
struct WeightedRegretResult {
    double value = 0.0;
    ControllerRealization controller;
    LtiSystem modified; // system the plain regret problem was solved on
};
WeightedRegretResult weighted_regret_reduce(const LtiSystem& sys, const Matrix& W_s,
                                            const Matrix& W_u, DisturbanceWeight kind,
                                            const Matrix& W_w_static = Matrix(),
                                            const SolverOptions& opts = {});

} // namespace compet
