#include "compet/freqeval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>

#include "compet/parallel.hpp"

namespace compet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// All metrics here are conjugate-symmetric in omega for real-coefficient
// systems, so evaluations fold onto [0, pi].
double fold(double omega) {
    omega = std::fmod(omega, kTwoPi);
    if (omega < 0) omega += kTwoPi;
    return omega > std::numbers::pi ? kTwoPi - omega : omega;
}

ComplexMatrix resolvent_apply(const Matrix& A, const ComplexMatrix& B, std::complex<double> z) {
    if (A.rows() == 0) return ComplexMatrix::Zero(0, B.cols());
    ComplexMatrix M = z * ComplexMatrix::Identity(A.rows(), A.rows()) -
                      A.cast<std::complex<double>>();
    Eigen::JacobiSVD<ComplexMatrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-12 * std::max(1.0, sv(0)))
        throw EigOnCircle("frequency evaluation at a pole of the realization");
    return M.partialPivLu().solve(B);
}

struct Context {
    const LtiSystem& sys;
    Matrix Qh, Rhalf, Rinvhalf;

    explicit Context(const LtiSystem& s)
        : sys(s),
          Qh(psd_sqrt(symmetrize(s.Q))),
          Rhalf(psd_sqrt(symmetrize(s.R))),
          Rinvhalf(psd_inv_sqrt(symmetrize(s.R))) {}

    ComplexMatrix controller_eval(const ControllerRealization& ctrl,
                                  std::complex<double> z) const {
        if (ctrl.Ck.rows() == 0 || ctrl.Bk.cols() == 0)
            throw DimensionMismatch("transfer_TK: controller lacks a transfer form");
        return ctrl.Ck.cast<std::complex<double>>() *
               resolvent_apply(ctrl.Ak, ctrl.Bk.cast<std::complex<double>>(), z);
    }

    ComplexMatrix TK(const ControllerRealization& ctrl, double omega) const {
        const std::complex<double> z = std::polar(1.0, omega);
        const ComplexMatrix Kz = controller_eval(ctrl, z);
        const ComplexMatrix RxA =
            resolvent_apply(sys.A, sys.B_u.cast<std::complex<double>>() * Kz +
                                       sys.B_w.cast<std::complex<double>>(),
                            z);
        const Eigen::Index n = sys.n(), p = sys.p(), m = sys.m();
        ComplexMatrix T(n + p, m);
        T.topRows(n) = Qh.cast<std::complex<double>>() * RxA;
        T.bottomRows(p) = Rhalf.cast<std::complex<double>>() * Kz;
        return T;
    }

    ComplexMatrix clair(double omega) const {
        const std::complex<double> z = std::polar(1.0, omega);
        const ComplexMatrix F =
            Qh.cast<std::complex<double>>() *
            resolvent_apply(sys.A, (sys.B_u * Rinvhalf).cast<std::complex<double>>(), z);
        const ComplexMatrix G =
            Qh.cast<std::complex<double>>() *
            resolvent_apply(sys.A, sys.B_w.cast<std::complex<double>>(), z);
        const ComplexMatrix inner =
            ComplexMatrix::Identity(sys.n(), sys.n()) + F * F.adjoint();
        return G.adjoint() * inner.ldlt().solve(G);
    }
};

double clamp_tiny_negative(double v) { return (v < 0.0 && v > -1e-9) ? 0.0 : v; }

std::vector<double> grid_values(const std::function<double(double)>& f,
                                const std::vector<double>& grid) {
    // Fold to [0, pi] and evaluate each distinct folded frequency once.
    std::map<double, double> cache;
    for (double w : grid) cache.emplace(fold(w), 0.0);
    std::vector<double> keys;
    keys.reserve(cache.size());
    for (auto& kv : cache) keys.push_back(kv.first);
    std::vector<double> vals(keys.size());
    parallel_for(keys.size(), [&](std::size_t i) { vals[i] = f(keys[i]); });
    for (std::size_t i = 0; i < keys.size(); ++i) cache[keys[i]] = vals[i];
    std::vector<double> out;
    out.reserve(grid.size());
    for (double w : grid) out.push_back(cache[fold(w)]);
    return out;
}

SupResult sup_search(const std::function<double(double)>& f, const std::vector<double>& grid) {
    if (grid.empty()) throw DimensionMismatch("frequency grid is empty");
    const std::vector<double> vals = grid_values(f, grid);
    const std::size_t N = grid.size();

    SupResult best;
    best.value = vals[0];
    best.omega = grid[0];
    for (std::size_t i = 1; i < N; ++i)
        if (vals[i] > best.value) {
            best.value = vals[i];
            best.omega = grid[i];
        }

    // Golden-section refinement around the top local maxima (cyclic grid).
    std::vector<std::size_t> order(N);
    for (std::size_t i = 0; i < N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    std::vector<std::size_t> peaks;
    for (std::size_t idx : order) {
        const std::size_t prev = (idx + N - 1) % N;
        const std::size_t next = (idx + 1) % N;
        if (vals[idx] >= vals[prev] && vals[idx] >= vals[next]) {
            bool near = false;
            for (std::size_t pk : peaks)
                near = near || (std::max(pk, idx) - std::min(pk, idx) <= 2) ||
                       (N - (std::max(pk, idx) - std::min(pk, idx)) <= 2);
            if (!near) peaks.push_back(idx);
        }
        if (peaks.size() == 3) break;
    }

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t idx : peaks) {
        const std::size_t prev = (idx + N - 1) % N;
        const std::size_t next = (idx + 1) % N;
        double a = grid[prev];
        double b = grid[next];
        if (b <= a) b += kTwoPi; // wrapped bracket
        double x1 = b - invphi * (b - a);
        double x2 = a + invphi * (b - a);
        double f1 = f(fold(x1));
        double f2 = f(fold(x2));
        for (int it = 0; it < 30; ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + invphi * (b - a);
                f2 = f(fold(x2));
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - invphi * (b - a);
                f1 = f(fold(x1));
            }
        }
        for (auto [x, fx] : {std::pair{x1, f1}, std::pair{x2, f2}})
            if (fx > best.value) {
                best.value = fx;
                best.omega = std::fmod(x, kTwoPi);
            }
    }
    return best;
}

double trapezoid_integral(const std::function<double(double)>& f,
                          const std::vector<double>& grid) {
    // Periodic composite trapezoid, mean over [0, 2pi).
    const std::size_t N = grid.size();
    const std::vector<double> vals = grid_values(f, grid);
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double w0 = grid[i];
        const double w1 = (i + 1 < N) ? grid[i + 1] : grid[0] + kTwoPi;
        acc += 0.5 * (vals[i] + vals[(i + 1) % N]) * (w1 - w0);
    }
    return acc / kTwoPi;
}

double richardson_integral(const std::function<double(double)>& f,
                           const std::vector<double>& grid) {
    const double coarse = trapezoid_integral(f, grid);
    std::vector<double> fine;
    fine.reserve(2 * grid.size());
    const std::size_t N = grid.size();
    for (std::size_t i = 0; i < N; ++i) {
        const double w0 = grid[i];
        const double w1 = (i + 1 < N) ? grid[i + 1] : grid[0] + kTwoPi;
        fine.push_back(w0);
        fine.push_back(std::fmod(0.5 * (w0 + w1), kTwoPi));
    }
    const double refined = trapezoid_integral(f, fine);
    return (4.0 * refined - coarse) / 3.0;
}

TransferRealization disturbance_factor_inverse(const LtiSystem& sys) {
    const LtiSystem norm = normalize_r(sys);
    const DeltaFactor delta = factor_delta(norm);
    const NablaFactor nabla = factor_nabla(norm, delta);
    return factor_M(norm, nabla).M_inv;
}

double cr_density(const Context& ctx, const ControllerRealization& ctrl,
                  const TransferRealization& Minv, double omega) {
    const std::complex<double> z = std::polar(1.0, omega);
    const ComplexMatrix Mi = Minv.eval(z);
    if (sigma_max(Mi) > 1e12)
        throw RankDeficientM("metric_cr: disturbance factor singular on the grid");
    const double s = sigma_max(ctx.TK(ctrl, omega) * Mi);
    return s * s;
}

} // namespace

std::vector<double> default_grid(int points) {
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = kTwoPi * i / points;
    return g;
}

ComplexMatrix clairvoyant_response(const LtiSystem& sys, double omega) {
    return Context(sys).clair(omega);
}

ComplexMatrix transfer_TK(const LtiSystem& sys, const ControllerRealization& ctrl,
                          double omega) {
    return Context(sys).TK(ctrl, omega);
}

double metric_frobenius(const LtiSystem& sys, const ControllerRealization& ctrl,
                        const std::vector<double>& grid) {
    Context ctx(sys);
    return richardson_integral(
        [&](double w) { return ctx.TK(ctrl, w).squaredNorm(); }, grid);
}

SupResult metric_opnorm(const LtiSystem& sys, const ControllerRealization& ctrl,
                        const std::vector<double>& grid) {
    Context ctx(sys);
    return sup_search(
        [&](double w) {
            const double s = sigma_max(ctx.TK(ctrl, w));
            return s * s;
        },
        grid);
}

SupResult metric_regret(const LtiSystem& sys, const ControllerRealization& ctrl,
                        const std::vector<double>& grid) {
    Context ctx(sys);
    return sup_search(
        [&](double w) {
            const ComplexMatrix T = ctx.TK(ctrl, w);
            return clamp_tiny_negative(
                lambda_max_hermitian(T.adjoint() * T - ctx.clair(w)));
        },
        grid);
}

SupResult metric_cr(const LtiSystem& sys, const ControllerRealization& ctrl,
                    const std::vector<double>& grid) {
    Context ctx(sys);
    const TransferRealization Minv = disturbance_factor_inverse(sys);
    return sup_search([&](double w) { return cr_density(ctx, ctrl, Minv, w); }, grid);
}

FrequencyMetrics evaluate_all(const LtiSystem& sys, const NamedControllers& ctrls,
                              const std::vector<double>& grid) {
    Context ctx(sys);
    const TransferRealization Minv = disturbance_factor_inverse(sys);
    FrequencyMetrics out;
    out.grid = grid;
    out.per_controller.resize(ctrls.size());
    for (std::size_t c = 0; c < ctrls.size(); ++c) {
        ControllerMetrics& cm = out.per_controller[c];
        cm.name = ctrls[c].first;
        const ControllerRealization& K = ctrls[c].second;
        auto frob = [&](double w) { return ctx.TK(K, w).squaredNorm(); };
        auto opn = [&](double w) {
            const double s = sigma_max(ctx.TK(K, w));
            return s * s;
        };
        auto reg = [&](double w) {
            const ComplexMatrix T = ctx.TK(K, w);
            return clamp_tiny_negative(lambda_max_hermitian(T.adjoint() * T - ctx.clair(w)));
        };
        auto crm = [&](double w) { return cr_density(ctx, K, Minv, w); };
        cm.frob_density = grid_values(frob, grid);
        cm.opnorm = grid_values(opn, grid);
        cm.regret = grid_values(reg, grid);
        cm.cr = grid_values(crm, grid);
        cm.sup_opnorm = sup_search(opn, grid);
        cm.sup_regret = sup_search(reg, grid);
        cm.sup_cr = sup_search(crm, grid);
        cm.frobenius = richardson_integral(frob, grid);
    }
    return out;
}

ControllerMetrics clairvoyant_metrics(const LtiSystem& sys, const std::vector<double>& grid) {
    Context ctx(sys);
    ControllerMetrics cm;
    cm.name = "noncausal";
    auto frob = [&](double w) { return ctx.clair(w).trace().real(); };
    auto opn = [&](double w) { return lambda_max_hermitian(ctx.clair(w)); };
    cm.frob_density = grid_values(frob, grid);
    cm.opnorm = grid_values(opn, grid);
    cm.regret.assign(grid.size(), 0.0);
    cm.cr.assign(grid.size(), 1.0);
    cm.sup_opnorm = sup_search(opn, grid);
    cm.sup_regret = SupResult{0.0, grid.empty() ? 0.0 : grid[0]};
    cm.sup_cr = SupResult{1.0, grid.empty() ? 0.0 : grid[0]};
    cm.frobenius = richardson_integral(frob, grid);
    return cm;
}

void write_sweep_csv(const FrequencyMetrics& metrics, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    out << "omega,controller,frob_density,opnorm,regret,cr\n";
    char buf[512];
    for (std::size_t i = 0; i < metrics.grid.size(); ++i) {
        for (const auto& cm : metrics.per_controller) {
            std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g,%.17g,%.17g,%.17g\n",
                          metrics.grid[i], cm.name.c_str(), cm.frob_density[i], cm.opnorm[i],
                          cm.regret[i], cm.cr[i]);
            out << buf;
        }
    }
}

} // namespace compet
