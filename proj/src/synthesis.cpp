#include "compet/synthesis.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace compet {

namespace {

std::string trim_key(const char* k) { return std::string(k); }

void add_matrix_line(std::ostringstream& out, const char* key, const Matrix& M) {
    if (M.size() == 0) return;
    out << trim_key(key) << " = " << format_matrix(M) << "\n";
}

/// Relative residuals of every matrix equation present in the certificate,
/// evaluated on the R-normalized system.
std::map<std::string, double> certificate_residuals(const LtiSystem& norm,
                                                    const SynthesisCertificate& c) {
    std::map<std::string, double> r;
    const Matrix& A = norm.A;
    const Matrix& Bu = norm.B_u;
    const Matrix& Bw = norm.B_w;
    const Matrix Qh = psd_sqrt(symmetrize(norm.Q));
    const Eigen::Index p = norm.p();

    if (c.P.size() > 0) {
        const Matrix Ru = Matrix::Identity(p, p) + Bu.transpose() * c.P * Bu;
        const Matrix rhs = A.transpose() * c.P * A + norm.Q -
                           A.transpose() * c.P * Bu *
                               Ru.ldlt().solve(Bu.transpose() * c.P * A);
        r["riccati_P"] = relative_residual(c.P, rhs);
    }
    if (c.T.size() > 0) {
        const Matrix rhs = A * c.T * A.transpose() + Bu * Bu.transpose() -
                           A * c.T * Qh *
                               c.R_T.ldlt().solve(Qh * c.T * A.transpose());
        r["riccati_T"] = relative_residual(c.T, rhs);
    }
    if (c.M.size() > 0) {
        const Matrix S = Qh * c.R_T.ldlt().solve(Qh);
        const Matrix MS = c.M + S;
        const Matrix rhs = c.A_T.transpose() * MS * c.A_T -
                           c.K_M.transpose() * c.R_M * c.K_M;
        r["riccati_M"] = relative_residual(c.M, rhs);
    }
    if (c.Z1.size() > 0) {
        const Matrix Ru = Matrix::Identity(p, p) + Bu.transpose() * c.P * Bu;
        const Matrix W = Bu * Ru.ldlt().solve(Bu.transpose());
        r["lyap_Z1"] = relative_residual(c.Z1, c.A_K * c.Z1 * c.A_K.transpose() + W);
        if (c.ratio > 1.0 + 1e-12)
            r["lyap_Zstar"] = relative_residual(
                c.Zstar, c.A_K * c.Zstar * c.A_K.transpose() + W / (c.ratio - 1.0));
    }
    if (c.Pi.size() > 0) {
        const Matrix PU = c.P - c.A_K.transpose() * c.U;
        const Matrix W =
            PU * Bw * c.R_M.ldlt().solve(Bw.transpose()) * PU.transpose();
        r["lyap_Pi"] =
            relative_residual(c.Pi, c.A_K.transpose() * c.Pi * c.A_K + symmetrize(W));
    }
    if (c.U.size() > 0)
        r["sylv_U"] = relative_residual(
            c.U, c.A_K.transpose() * c.U * c.A_M + c.P * Bw * c.K_M);
    return r;
}

ControllerRealization denormalize(const LtiSystem& orig, const Matrix& Rinvhalf,
                                  const Matrix& Ac, const Matrix& Bc, const Matrix& Cc,
                                  const Matrix& Dx, const std::string& name) {
    ControllerRealization c =
        ControllerRealization::from_feedback(orig, Ac, Bc, Rinvhalf * Cc, Rinvhalf * Dx);
    c.name = name;
    return c;
}

double bw_condition(const Matrix& Bw) {
    Eigen::JacobiSVD<Matrix> svd(Bw);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / sv(sv.size() - 1);
}

} // namespace

std::string SynthesisCertificate::to_report() const {
    std::ostringstream out;
    out << "dispatch = " << dispatch << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", ratio);
    out << "ratio = " << buf << "\n";
    for (const auto& [k, v] : residuals) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << "residual." << k << " = " << buf << "\n";
    }
    add_matrix_line(out, "P", P);
    add_matrix_line(out, "K_lqr", K_lqr);
    add_matrix_line(out, "T", T);
    add_matrix_line(out, "M", M);
    add_matrix_line(out, "R_T", R_T);
    add_matrix_line(out, "R_M", R_M);
    add_matrix_line(out, "K_M", K_M);
    add_matrix_line(out, "A_K", A_K);
    add_matrix_line(out, "A_T", A_T);
    add_matrix_line(out, "A_M", A_M);
    add_matrix_line(out, "Z_1", Z1);
    add_matrix_line(out, "Z_star", Zstar);
    add_matrix_line(out, "Pi", Pi);
    add_matrix_line(out, "U", U);
    add_matrix_line(out, "K_gamma", K_gamma);
    add_matrix_line(out, "F_gamma", F_gamma);
    return out.str();
}

SynthesisResult synth_h2(const LtiSystem& sys, const SolverOptions& opts) {
    sys.check_dimensions();
    const LtiSystem norm = normalize_r(sys);
    const DeltaFactor delta = factor_delta(norm, opts);
    const Matrix Rinvhalf = psd_inv_sqrt(symmetrize(sys.R));

    SynthesisResult out;
    out.certificate.P = delta.P;
    out.certificate.K_lqr = delta.K_lqr;
    out.certificate.A_K = delta.A_K;
    out.certificate.dispatch = "h2";
    out.certificate.residuals = certificate_residuals(norm, out.certificate);
    const Eigen::Index n = sys.n(), p = sys.p();
    out.controller = denormalize(sys, Rinvhalf, Matrix::Zero(0, 0), Matrix::Zero(0, n),
                                 Matrix::Zero(p, 0), -delta.K_lqr, "h2");
    return out;
}

SynthesisResult synth_cr(const LtiSystem& sys, const SolverOptions& opts) {
    sys.check_dimensions();
    const LtiSystem norm = normalize_r(sys);
    const Matrix Rinvhalf = psd_inv_sqrt(symmetrize(sys.R));
    const Eigen::Index n = norm.n(), p = norm.p(), m = norm.m();

    const bool scalar = (n == 1 && p == 1 && m == 1);
    const bool square = (m == n && bw_condition(norm.B_w) < 1e8);

    const DeltaFactor delta = factor_delta(norm, opts);
    const NablaFactor nabla = factor_nabla(norm, delta, opts);

    SynthesisResult out;
    SynthesisCertificate& c = out.certificate;
    c.P = delta.P;
    c.K_lqr = delta.K_lqr;
    c.A_K = delta.A_K;
    c.T = nabla.T;
    c.R_T = nabla.R_T;
    c.A_T = nabla.A_T;

    if (square) {
        // Specialized construction for invertible B_w.
        const MFactor mf = factor_M(norm, nabla, opts);
        c.M = mf.Mmat;
        c.R_M = mf.R_M;
        c.K_M = mf.K_M;
        c.A_M = mf.A_M;

        const Matrix Sbar = delta.P - delta.A_K.transpose() * delta.P * nabla.A_T;
        const Matrix QinvT =
            Matrix(norm.Q.ldlt().solve(Matrix::Identity(n, n))) + nabla.T;
        c.Pi = solve_dlyap(delta.A_K.transpose(),
                           symmetrize(Sbar * QinvT * Sbar.transpose()), opts);
        const Matrix Ru = Matrix::Identity(p, p) +
                          norm.B_u.transpose() * delta.P * norm.B_u;
        c.Z1 = solve_dlyap(delta.A_K,
                           norm.B_u * Ru.ldlt().solve(norm.B_u.transpose()), opts);
        double value = lambda_max_pair(c.Z1, c.Pi);
        c.U = delta.P * nabla.A_T;

        if (scalar) {
            // Exact closed form; coincides with 1 + lambda_max(Z1 Pi). In the
            // scalar case Bu^2 P = Q T, so 1/Q + T = (1 + Bu^2 P)/Q and the
            // expression collapses to 1 + Bu^2 P^2 / Q.
            const double bu = norm.B_u(0, 0), q = norm.Q(0, 0);
            const double Pv = delta.P(0, 0), Tv = nabla.T(0, 0);
            c.ratio = 1.0 + bu * bu * Pv * Pv * (1.0 / q + Tv) / (1.0 + bu * bu * Pv);
            c.dispatch = "scalar";
        } else {
            c.ratio = 1.0 + value;
            c.dispatch = "square";
        }

        Matrix Kbar = Matrix::Zero(n, n);
        if (value > 1e-13 * std::max(1.0, c.Z1.norm() * c.Pi.norm())) {
            c.Zstar = c.Z1 / value;
            const Matrix lhs =
                Matrix::Identity(n, n) -
                delta.A_K * c.Zstar * delta.A_K.transpose() * c.Pi;
            Kbar = Matrix(lhs.partialPivLu().solve(delta.A_K * c.Zstar * Sbar));
            c.F_gamma = delta.A_K - Kbar * QinvT * Sbar.transpose();
        } else {
            value = 0.0;
            c.Zstar = Matrix::Zero(n, n);
            c.F_gamma = delta.A_K;
            if (scalar) c.ratio = 1.0;
        }
        c.K_gamma = Kbar * norm.B_w;
        if (spectral_radius(c.F_gamma) >= 1.0)
            throw RiccatiFailure("synth_cr: unstable approximant recursion");

        Matrix Ac = Matrix::Zero(2 * n, 2 * n);
        Ac.topLeftCorner(n, n) = nabla.A_T;
        Ac.bottomLeftCorner(n, n) = Kbar * nabla.A_T;
        Ac.bottomRightCorner(n, n) = c.F_gamma;
        Matrix Bc = Matrix::Zero(2 * n, n);
        Bc.topRows(n) = Matrix::Identity(n, n);
        Bc.bottomRows(n) = Kbar;
        Matrix Cc = Matrix::Zero(p, 2 * n);
        Cc.leftCols(n) = delta.Lambda * delta.P * nabla.A_T;
        Cc.rightCols(n) = -delta.Lambda * c.Pi;
        out.controller = denormalize(sys, Rinvhalf, Ac, Bc, Cc, -delta.K_lqr, "cr");
    } else {
        const MFactor mf = factor_M(norm, nabla, opts);
        const Decomposition dec = decompose(norm, delta, nabla, mf, opts);
        const NehariSolution neh = nehari_solve(norm, delta, mf, dec, opts);
        const AssembledController asmres =
            assemble_controller(norm, delta, nabla, mf, dec, neh);

        c.M = mf.Mmat;
        c.R_M = mf.R_M;
        c.K_M = mf.K_M;
        c.A_M = mf.A_M;
        c.Z1 = neh.Z1;
        c.Zstar = neh.Zstar;
        c.Pi = neh.Pi;
        c.U = dec.U;
        c.K_gamma = neh.K_gamma;
        c.F_gamma = neh.F_gamma;
        c.ratio = 1.0 + neh.value;
        c.dispatch = "general";
        const ControllerRealization& raw = asmres.controller;
        out.controller = denormalize(sys, Rinvhalf, raw.Ac, raw.Bc, raw.Cc, raw.Dx, "cr");
    }

    c.residuals = certificate_residuals(norm, c);
    return out;
}

RegretResult synth_regret(const LtiSystem& sys, const SolverOptions& opts) {
    sys.check_dimensions();
    const LtiSystem norm = normalize_r(sys);
    const Matrix Rinvhalf = psd_inv_sqrt(symmetrize(sys.R));
    const WeightedRegretResult red = weighted_regret_reduce(
        sys, Matrix::Identity(sys.n(), sys.n()), Matrix::Identity(sys.p(), sys.p()),
        DisturbanceWeight::identity, Matrix(), opts);
    RegretResult out;
    out.value = red.value;
    const ControllerRealization& raw = red.controller;
    out.controller = denormalize(sys, Rinvhalf, raw.Ac, raw.Bc, raw.Cc, raw.Dx, "regret");
    return out;
}

HinfResult synth_hinf(const LtiSystem& sys, const HinfOptions& opts) {
    sys.check_dimensions();
    const LtiSystem norm = normalize_r(sys);
    const Matrix Rinvhalf = psd_inv_sqrt(symmetrize(sys.R));
    const Eigen::Index n = norm.n(), p = norm.p(), m = norm.m();

    Matrix B(n, p + m);
    B.leftCols(p) = norm.B_u;
    B.rightCols(m) = norm.B_w;

    // Feasibility of the sub-optimal attenuation level via the game Riccati
    // equation with input weight diag(I, -g^2 I).
    auto feasible = [&](double gamma) -> std::optional<Matrix> {
        Matrix Rhat = Matrix::Identity(p + m, p + m);
        Rhat.bottomRightCorner(m, m) *= -gamma * gamma;
        Matrix P;
        try {
            P = solve_dare_indefinite(norm.A, B, norm.Q, Rhat, opts.solver);
        } catch (const Error&) {
            return std::nullopt;
        }
        if (P.eigenvalues().real().minCoeff() < -1e-8 * std::max(1.0, P.norm()))
            return std::nullopt;
        const Matrix spectral = gamma * gamma * Matrix::Identity(m, m) -
                                norm.B_w.transpose() * P * norm.B_w;
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(spectral));
        if (es.eigenvalues().minCoeff() <= 0.0) return std::nullopt;
        const Matrix gains =
            Matrix(Rhat + B.transpose() * P * B).partialPivLu().solve(B.transpose() * P *
                                                                      norm.A);
        const Matrix Ku = gains.topRows(p);
        if (spectral_radius(norm.A - norm.B_u * Ku) >= 1.0) return std::nullopt;
        return Ku;
    };

    // Bracket: clairvoyant floor below, twice the LQR worst-case gain above.
    const std::vector<double> grid = default_grid(opts.grid_points);
    double floor2 = 0.0;
    for (double w : grid)
        floor2 = std::max(floor2, lambda_max_hermitian(clairvoyant_response(norm, w)));
    double lower = std::sqrt(std::max(floor2, 0.0));
    const SynthesisResult h2 = synth_h2(sys);
    double upper = 2.0 * std::sqrt(metric_opnorm(sys, h2.controller, grid).value);
    upper = std::max(upper, lower * (1.0 + 10.0 * opts.rel_tol) + 1e-12);

    std::optional<Matrix> best = feasible(upper);
    for (int d = 0; !best && d < opts.max_doublings; ++d) {
        upper *= 2.0;
        best = feasible(upper);
    }
    if (!best)
        throw InfeasibleAtUpperBound("synth_hinf: no feasible attenuation level found");

    while (upper - lower > opts.rel_tol * upper) {
        const double mid = 0.5 * (upper + lower);
        if (auto Ku = feasible(mid)) {
            upper = mid;
            best = std::move(Ku);
        } else {
            lower = mid;
        }
    }

    HinfResult out;
    out.gamma = upper;
    out.controller =
        denormalize(sys, Rinvhalf, Matrix::Zero(0, 0), Matrix::Zero(0, n),
                    Matrix::Zero(p, 0), -(*best), "hinf");
    return out;
}

} // namespace compet
