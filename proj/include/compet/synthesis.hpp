#pragma once

#include <map>
#include <string>

#include "compet/freqeval.hpp"
#include "compet/model.hpp"
#include "compet/pipeline.hpp"

namespace compet {

/// Every constant of the competitive-ratio construction, expressed for the
/// R-normalized system, together with the relative residual of each matrix
/// equation re-evaluated on the stored solution.
struct SynthesisCertificate {
    Matrix P, K_lqr, T, M, R_T, R_M, K_M;
    Matrix A_K, A_T, A_M;
    Matrix Z1, Zstar, Pi, U, K_gamma, F_gamma;
    double ratio = 1.0;               // 1 + lambda_max(Z1 Pi)
    std::string dispatch;             // "scalar" | "square" | "general"
    std::map<std::string, double> residuals;

    std::string to_report() const;    // key=value text serialization
};

struct SynthesisResult {
    SynthesisCertificate certificate;
    ControllerRealization controller; // original-u coordinates
};

/// Steady-state LQR state feedback u = -R^{-1/2} K_lqr x (certificate carries
/// only the P-equation block).
SynthesisResult synth_h2(const LtiSystem& sys, const SolverOptions& opts = {});

/// Optimal competitive-ratio controller; dispatches to the scalar closed form
/// (n=p=m=1), the square-B_w specialization, or the general construction.
SynthesisResult synth_cr(const LtiSystem& sys, const SolverOptions& opts = {});

struct RegretResult {
    double value = 0.0; // optimal worst-case regret
    ControllerRealization controller;
};
RegretResult synth_regret(const LtiSystem& sys, const SolverOptions& opts = {});

struct HinfOptions {
    double rel_tol = 1e-4;
    int grid_points = 512; // bracket/verification grid
    int max_doublings = 20;
    SolverOptions solver;
};
struct HinfResult {
    double gamma = 0.0; // smallest feasible disturbance-gain bound found
    ControllerRealization controller;
};
/// Bisection on the feasibility of the sub-optimal disturbance-attenuation
/// problem via the sign-indefinite game Riccati equation; returns the central
/// state-feedback controller at the final feasible gamma.
HinfResult synth_hinf(const LtiSystem& sys, const HinfOptions& opts = {});

} // namespace compet
