// Acceptance harness: one line per criterion, PASS/FAIL/SKIP, nonzero exit on
// any failure. argv[1] (optional) is the repository root, used to locate the
// optional external benchmark data for criterion 9.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "compet/freqeval.hpp"
#include "compet/pipeline.hpp"
#include "compet/sim.hpp"
#include "compet/synthesis.hpp"
#include "helpers.hpp"

using namespace compet;
using testutil::Rng;

namespace {

int g_failures = 0;

void report(int idx, const std::string& verdict, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", idx, verdict.c_str(), detail.c_str());
    std::fflush(stdout);
    if (verdict == "FAIL") ++g_failures;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_u_difference(const LtiSystem& sys, const ControllerRealization& a,
                        const ControllerRealization& b, std::uint64_t seed) {
    const DisturbanceSpec dist = DisturbanceSpec::gaussian(seed, 300);
    SimExtras extras;
    extras.record_trajectories = true;
    const SimResult ra = simulate(sys, a, dist, 1, seed, extras);
    const SimResult rb = simulate(sys, b, dist, 1, seed, extras);
    double worst = 0.0;
    for (std::size_t t = 0; t < ra.u_traj.size(); ++t)
        worst = std::max(worst, (ra.u_traj[t] - rb.u_traj[t]).norm());
    return worst;
}

// ---------------------------------------------------------------------------
// 1. Scalar closed form: optimal ratio controller is the LQR law and the
//    certificate ratio matches both the closed form and the sweep.
void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(9001);
    double worst_u = 0.0, worst_form = 0.0, worst_sweep = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        LtiSystem sys;
        sys.A = Matrix::Constant(1, 1, rng.uniform(-2.0, 2.0));
        sys.B_u = Matrix::Constant(1, 1, rng.uniform(0.1, 3.0));
        sys.B_w = Matrix::Constant(1, 1, rng.uniform(0.1, 3.0));
        sys.Q = Matrix::Constant(1, 1, rng.uniform(0.1, 10.0));
        sys.R = Matrix::Constant(1, 1, rng.uniform(0.1, 10.0));
        const SynthesisResult cr = synth_cr(sys);
        const SynthesisResult h2 = synth_h2(sys);
        worst_u = std::max(worst_u,
                           max_u_difference(sys, cr.controller, h2.controller, 100 + trial));
        const LtiSystem norm = normalize_r(sys);
        const double bu = norm.B_u(0, 0), q = norm.Q(0, 0), P = cr.certificate.P(0, 0);
        const double T = cr.certificate.T(0, 0);
        // Scalar identity Bu^2 P = Q T collapses this to 1 + Bu^2 P^2 / Q.
        const double expect = 1.0 + bu * bu * P * P * (1.0 / q + T) / (1.0 + bu * bu * P);
        worst_form = std::max(worst_form, std::abs(cr.certificate.ratio - expect) / expect);
        const SupResult sup = metric_cr(sys, cr.controller, default_grid(512));
        worst_sweep = std::max(worst_sweep,
                               std::abs(sup.value - cr.certificate.ratio) /
                                   cr.certificate.ratio);
    }
    const double dt = elapsed_s(t0);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "(u-diff %.2e <= 1e-12, ratio form err %.2e, sweep err %.2e <= 1e-6, "
                  "%.2f s < 5 s)",
                  worst_u, worst_form, worst_sweep, dt);
    const bool ok = worst_u <= 1e-12 && worst_form <= 1e-11 && worst_sweep <= 1e-6 && dt < 5.0;
    report(1, ok ? "PASS" : "FAIL", buf);
}

std::vector<LtiSystem> mixed_systems(int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LtiSystem> out;
    for (int trial = 0; trial < count; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.unit() * 5);
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.unit() * n);
        const Eigen::Index m =
            (trial % 2 == 0) ? n : 1 + static_cast<Eigen::Index>(rng.unit() * (n - 1));
        out.push_back(testutil::random_system(rng, n, p, m));
    }
    return out;
}

// 2. Certificate ratio vs the refined frequency sweep on mixed systems.
void criterion2(const std::vector<LtiSystem>& systems) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const LtiSystem& sys : systems) {
        const SynthesisResult res = synth_cr(sys);
        const SupResult sup = metric_cr(sys, res.controller, default_grid(2048));
        worst = std::max(worst,
                         std::abs(sup.value - res.certificate.ratio) / res.certificate.ratio);
    }
    const double dt = elapsed_s(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "(20 systems, sweep err %.2e <= 1e-6, %.1f s < 60 s)",
                  worst, dt);
    report(2, (worst <= 1e-6 && dt < 60.0) ? "PASS" : "FAIL", buf);
}

// 3. Square construction vs general construction.
void criterion3() {
    Rng rng(9003);
    double worst_ratio = 0.0, worst_resp = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.unit() * 3);
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.unit() * n);
        const LtiSystem sys = testutil::random_system(rng, n, p, n);
        const SynthesisResult fast = synth_cr(sys);
        const LtiSystem norm = normalize_r(sys);
        const DeltaFactor delta = factor_delta(norm);
        const NablaFactor nabla = factor_nabla(norm, delta);
        const MFactor mf = factor_M(norm, nabla);
        const Decomposition dec = decompose(norm, delta, nabla, mf);
        const NehariSolution neh = nehari_solve(norm, delta, mf, dec);
        const AssembledController general = assemble_controller(norm, delta, nabla, mf, dec, neh);
        worst_ratio = std::max(worst_ratio, std::abs(fast.certificate.ratio - (1.0 + neh.value)) /
                                                fast.certificate.ratio);
        const Matrix Rinvhalf = psd_inv_sqrt(symmetrize(sys.R));
        for (double w : default_grid(64)) {
            const std::complex<double> z = std::polar(1.0, w);
            const ComplexMatrix a = fast.controller.eval(z);
            const ComplexMatrix b =
                Rinvhalf.cast<std::complex<double>>() * general.controller.eval(z);
            worst_resp = std::max(worst_resp, (a - b).norm() / std::max(1.0, b.norm()));
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "(ratio err %.2e <= 1e-10, response err %.2e <= 1e-8)",
                  worst_ratio, worst_resp);
    report(3, (worst_ratio <= 1e-10 && worst_resp <= 1e-8) ? "PASS" : "FAIL", buf);
}

// 4. Canonical factorization identities on the circle.
void criterion4(const std::vector<LtiSystem>& systems) {
    double worst = 0.0;
    for (const LtiSystem& sys : systems) {
        const LtiSystem norm = normalize_r(sys);
        const DeltaFactor delta = factor_delta(norm);
        const NablaFactor nabla = factor_nabla(norm, delta);
        const MFactor mf = factor_M(norm, nabla);
        const TransferRealization F = build_F(norm);
        const TransferRealization G = build_G(norm);
        const Eigen::Index n = norm.n(), p = norm.p();
        for (double w : default_grid(512)) {
            const std::complex<double> z = std::polar(1.0, w);
            const ComplexMatrix Fz = F.eval(z), Gz = G.eval(z);
            const ComplexMatrix Dz = delta.delta.eval(z);
            const ComplexMatrix rhs1 =
                ComplexMatrix::Identity(p, p) + Fz.adjoint() * Fz;
            worst = std::max(worst, (Dz.adjoint() * Dz - rhs1).norm() / rhs1.norm());
            const ComplexMatrix Nz = nabla.nabla.eval(z);
            const ComplexMatrix rhs2 =
                ComplexMatrix::Identity(n, n) + Fz * Fz.adjoint();
            worst = std::max(worst, (Nz * Nz.adjoint() - rhs2).norm() / rhs2.norm());
            const ComplexMatrix Mz = mf.M.eval(z);
            const ComplexMatrix rhs3 = Gz.adjoint() * rhs2.partialPivLu().solve(Gz);
            worst = std::max(worst,
                             (Mz.adjoint() * Mz - rhs3).norm() / std::max(1.0, rhs3.norm()));
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "(identity err %.2e <= 1e-8 on 512 points)", worst);
    report(4, worst <= 1e-8 ? "PASS" : "FAIL", buf);
}

// 5. All-pass witness of the optimal approximant.
void criterion5(const std::vector<LtiSystem>& systems) {
    double worst_level = 0.0, worst_flat = 0.0;
    for (const LtiSystem& sys : systems) {
        const LtiSystem norm = normalize_r(sys);
        const DeltaFactor delta = factor_delta(norm);
        const NablaFactor nabla = factor_nabla(norm, delta);
        const MFactor mf = factor_M(norm, nabla);
        const Decomposition dec = decompose(norm, delta, nabla, mf);
        const NehariSolution neh = nehari_solve(norm, delta, mf, dec);
        const double expect = std::sqrt(neh.value);
        if (expect < 1e-9) continue; // degenerate: zero approximant
        double lo = 1e300, hi = 0.0;
        for (double w : default_grid(256)) {
            const std::complex<double> z = std::polar(1.0, w);
            const double s = sigma_max(neh.Kprime.eval(z) - dec.anticausal_part.eval(z));
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        worst_level = std::max(worst_level, std::abs(hi - expect) / expect);
        worst_flat = std::max(worst_flat, (hi - lo) / hi);
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "(level err %.2e, flatness %.2e, both <= 1e-6)",
                  worst_level, worst_flat);
    report(5, (worst_level <= 1e-6 && worst_flat <= 1e-6) ? "PASS" : "FAIL", buf);
}

// 6. Finite-horizon brute-force oracle via explicit block-Toeplitz operators.
double toeplitz_ratio(const LtiSystem& sys, const ControllerRealization& ctrl, int N) {
    const Eigen::Index n = sys.n(), p = sys.p(), m = sys.m();
    const Matrix Qh = psd_sqrt(symmetrize(sys.Q));
    const Matrix Rh = psd_sqrt(symmetrize(sys.R));
    const Matrix Rinvh = psd_inv_sqrt(symmetrize(sys.R));

    // Markov parameters of the open-loop maps (input normalized by R^{-1/2}).
    std::vector<Matrix> Fk(N), Gk(N);
    Matrix Apow = Matrix::Identity(n, n);
    Fk[0] = Matrix::Zero(n, p);
    Gk[0] = Matrix::Zero(n, m);
    for (int k = 1; k < N; ++k) {
        Fk[k] = Qh * Apow * sys.B_u * Rinvh;
        Gk[k] = Qh * Apow * sys.B_w;
        Apow = sys.A * Apow;
    }
    Matrix FN = Matrix::Zero(N * n, N * p);
    Matrix GN = Matrix::Zero(N * n, N * m);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j) {
            FN.block(i * n, j * p, n, p) = Fk[i - j];
            GN.block(i * n, j * m, n, m) = Gk[i - j];
        }

    // Closed-loop impulse response of the synthesized controller,
    // stacked output [Q^{1/2} x_t; R^{1/2} u_t].
    const Eigen::Index q = ctrl.Ac.rows();
    std::vector<Matrix> Hk(N, Matrix::Zero(n + p, m));
    for (Eigen::Index j = 0; j < m; ++j) {
        Vector x = Vector::Zero(n);
        Vector xi = Vector::Zero(q);
        for (int t = 0; t < N; ++t) {
            Vector u = ctrl.Dx * x;
            if (q > 0) u += ctrl.Cc * xi;
            Hk[t].block(0, j, n, 1) = Qh * x;
            Hk[t].block(n, j, p, 1) = Rh * u;
            const Vector d = (t == 0) ? Vector(sys.B_w.col(j)) : Vector(Vector::Zero(n));
            const Vector xn = sys.A * x + sys.B_u * u + d;
            if (q > 0) xi = ctrl.Ac * xi + ctrl.Bc * d;
            x = xn;
        }
    }
    Matrix TK = Matrix::Zero(N * (n + p), N * m);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j)
            TK.block(i * (n + p), j * m, n + p, m) = Hk[i - j];

    // Restrict disturbances to the first half of the horizon: both costs are
    // truncated at N, so disturbances near the edge would otherwise be scored
    // on a one-step ratio instead of the steady-state one. The half-horizon
    // tail buffer keeps the clairvoyant Gram matrix positive definite too.
    const Eigen::Index cols = (N / 2) * m;
    const Matrix inner = Matrix::Identity(N * n, N * n) + FN * FN.transpose();
    const Matrix T0sq_full = GN.transpose() * inner.ldlt().solve(GN);
    const Matrix T0sq = T0sq_full.topLeftCorner(cols, cols);
    const Matrix TKred = TK.leftCols(cols);
    const Matrix TKsq = TKred.transpose() * TKred;
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(symmetrize(TKsq), symmetrize(T0sq));
    return ges.eigenvalues().maxCoeff();
}

void criterion6() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(9006);
    double worst = 0.0, worst_mono = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.unit() * 3);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.unit() * 3);
        const LtiSystem sys = testutil::random_system(rng, 3, p, m, false); // stable A
        const SynthesisResult res = synth_cr(sys);
        double prev = 0.0;
        double lam200 = 0.0;
        for (int N : {25, 50, 100, 200}) {
            const double lam = toeplitz_ratio(sys, res.controller, N);
            worst_mono = std::max(worst_mono, (prev - lam) / std::max(lam, 1e-300));
            prev = lam;
            if (N == 200) lam200 = lam;
        }
        worst = std::max(worst, std::abs(lam200 - res.certificate.ratio) /
                                    res.certificate.ratio);
    }
    const double dt = elapsed_s(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "(N=200 err %.2e <= 2e-2, monotonicity slack %.2e, %.1f s < 120 s)", worst,
                  worst_mono, dt);
    // Monotonicity slack covers generalized-eigensolver noise once the
    // sequence has converged and is numerically flat.
    report(6, (worst <= 0.02 && worst_mono <= 1e-5 && dt < 120.0) ? "PASS" : "FAIL", buf);
}

// 7. Each controller minimizes its own design metric.
void criterion7() {
    Rng rng(9007);
    bool ok = true;
    std::string note;
    for (int trial = 0; trial < 10 && ok; ++trial) {
        const LtiSystem sys = testutil::random_system(rng, 3, 2, 2);
        HinfOptions ho;
        ho.grid_points = 256;
        const NamedControllers ctrls = {{"h2", synth_h2(sys).controller},
                                        {"hinf", synth_hinf(sys, ho).controller},
                                        {"regret", synth_regret(sys).controller},
                                        {"cr", synth_cr(sys).controller}};
        const FrequencyMetrics fm = evaluate_all(sys, ctrls, default_grid(512));
        auto metric = [&](std::size_t i, int which) {
            const ControllerMetrics& cm = fm.per_controller[i];
            switch (which) {
                case 0: return cm.frobenius;
                case 1: return cm.sup_opnorm.value;
                case 2: return cm.sup_regret.value;
                default: return cm.sup_cr.value;
            }
        };
        const double slack[4] = {1e-9, 5e-3, 1e-9, 1e-9}; // hinf: bisection tolerance
        for (int which = 0; which < 4; ++which) {
            const double own = metric(static_cast<std::size_t>(which), which);
            for (std::size_t i = 0; i < 4; ++i)
                if (own > metric(i, which) * (1.0 + slack[which])) {
                    ok = false;
                    note = "trial " + std::to_string(trial) + ": " +
                           fm.per_controller[static_cast<std::size_t>(which)].name +
                           " beaten by " + fm.per_controller[i].name;
                }
        }
    }
    report(7, ok ? "PASS" : "FAIL",
           ok ? "(10 systems, each design metric minimized by its own controller)"
              : "(" + note + ")");
}

// 8. Time-domain averages match the frequency-domain predictions.
void criterion8() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(9008);
    const LtiSystem sys = testutil::random_system(rng, 3, 2, 2, false);
    HinfOptions ho;
    ho.grid_points = 256;
    const NamedControllers ctrls = {{"h2", synth_h2(sys).controller},
                                    {"hinf", synth_hinf(sys, ho).controller},
                                    {"regret", synth_regret(sys).controller},
                                    {"cr", synth_cr(sys).controller}};
    double worst_white = 0.0, worst_sine = 0.0;
    for (const auto& [name, ctrl] : ctrls) {
        const double target = metric_frobenius(sys, ctrl, default_grid(1024));
        const SimResult res =
            simulate(sys, ctrl, DisturbanceSpec::gaussian(11, 100000), 30, 11);
        worst_white = std::max(worst_white, std::abs(res.mean - target) / target);
        for (const double w0 : {0.016, 0.034, std::numbers::pi / 2.0, 0.99 * std::numbers::pi}) {
            const DisturbanceSpec dist = DisturbanceSpec::sine(w0, 1.0, 200000);
            const SimResult sr = simulate(sys, ctrl, dist, 1, 1);
            const ComplexMatrix T = transfer_TK(sys, ctrl, w0);
            const double expect =
                0.5 * (T * Eigen::VectorXcd::Ones(sys.m())).squaredNorm();
            worst_sine = std::max(worst_sine, std::abs(sr.mean - expect) / expect);
        }
    }
    const double dt = elapsed_s(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "(white-noise err %.2e <= 5e-2, sine err %.2e <= 2e-2, %.0f s < 600 s)",
                  worst_white, worst_sine, dt);
    report(8, (worst_white <= 0.05 && worst_sine <= 0.02 && dt < 600.0) ? "PASS" : "FAIL", buf);
}

// 9. Conditional benchmark reproduction (requires user-supplied data).
void criterion9(const std::string& root) {
    std::string path;
    if (const char* env = std::getenv("COMPET_CTL_HE1")) path = env;
    if (path.empty()) {
        const std::string candidate = root + "/external/HE1.sys";
        if (std::filesystem::exists(candidate)) path = candidate;
    }
    if (path.empty() || !std::filesystem::exists(path)) {
        report(9, "SKIP", "(external benchmark data not provided; set COMPET_CTL_HE1 or place "
                          "external/HE1.sys)");
        return;
    }
    const LtiSystem sys = load_system(path);
    const std::vector<double> grid = default_grid(1024);
    const double cr = metric_cr(sys, synth_cr(sys).controller, grid).value;
    const double h2 = metric_cr(sys, synth_h2(sys).controller, grid).value;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "(cr ratio %.4g ~ 3.13, h2 ratio %.4g ~ 3.46, 5%%)", cr, h2);
    const bool ok = std::abs(cr - 3.13) / 3.13 <= 0.05 && std::abs(h2 - 3.46) / 3.46 <= 0.05;
    report(9, ok ? "PASS" : "FAIL", buf);
}

// 10. Flatness of the optimized per-frequency curves.
void criterion10() {
    Rng rng(9010);
    double worst_cr = 0.0, worst_reg = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const Eigen::Index m = (trial % 2 == 0) ? 3 : 2;
        const LtiSystem sys = testutil::random_system(rng, 3, 2, m);
        const NamedControllers ctrls = {{"cr", synth_cr(sys).controller},
                                        {"regret", synth_regret(sys).controller}};
        const FrequencyMetrics fm = evaluate_all(sys, ctrls, default_grid(2048));
        for (const auto& cm : fm.per_controller) {
            const auto& curve = (cm.name == "cr") ? cm.cr : cm.regret;
            double lo = 1e300, hi = 0.0;
            for (double v : curve) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double flat = (hi - lo) / std::max(hi, 1e-300);
            if (cm.name == "cr")
                worst_cr = std::max(worst_cr, flat);
            else
                worst_reg = std::max(worst_reg, flat);
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "(cr flatness %.2e, regret flatness %.2e, both <= 1e-3)",
                  worst_cr, worst_reg);
    report(10, (worst_cr <= 1e-3 && worst_reg <= 1e-3) ? "PASS" : "FAIL", buf);
}

} // namespace

int main(int argc, char** argv) {
    const std::string root = (argc > 1) ? argv[1] : ".";
    const std::vector<LtiSystem> systems = mixed_systems(20, 9002);
    struct Item {
        int idx;
        std::function<void()> run;
    };
    const std::vector<Item> items = {
        {1, [] { criterion1(); }},
        {2, [&] { criterion2(systems); }},
        {3, [] { criterion3(); }},
        {4, [&] { criterion4(systems); }},
        {5, [&] { criterion5(systems); }},
        {6, [] { criterion6(); }},
        {7, [] { criterion7(); }},
        {8, [] { criterion8(); }},
        {9, [&] { criterion9(root); }},
        {10, [] { criterion10(); }},
    };
    for (const auto& item : items) {
        try {
            item.run();
        } catch (const std::exception& e) {
            report(item.idx, "FAIL", std::string("(exception: ") + e.what() + ")");
        }
    }
    if (g_failures > 0) {
        std::printf("acceptance: %d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("acceptance: all criteria passed\n");
    return 0;
}
