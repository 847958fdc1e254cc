#include "compet/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "compet/parallel.hpp"

namespace compet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + b));
}

double uniform01(std::uint64_t bits) {
    // (0, 1]: avoids log(0) below.
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal draw, pure in (seed, counter); hand-rolled Box-Muller so
/// sequences are identical across platforms and thread counts.
double normal_draw(std::uint64_t seed, std::uint64_t counter) {
    const double u1 = uniform01(splitmix64(mix(seed, 2 * counter)));
    const double u2 = uniform01(splitmix64(mix(seed, 2 * counter + 1)));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace

DisturbanceSpec DisturbanceSpec::gaussian(std::uint64_t seed, long horizon) {
    DisturbanceSpec s;
    s.kind = DisturbanceKind::gaussian;
    s.seed = seed;
    s.horizon = horizon;
    return s;
}

DisturbanceSpec DisturbanceSpec::sine(double omega0, double amplitude, long horizon) {
    DisturbanceSpec s;
    s.kind = DisturbanceKind::sine;
    s.omega0 = omega0;
    s.amplitude = amplitude;
    s.horizon = horizon;
    return s;
}

DisturbanceSpec DisturbanceSpec::from_file(const std::string& path, Eigen::Index m,
                                           long horizon) {
    DisturbanceSpec s;
    s.kind = DisturbanceKind::file;
    s.path = path;
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open disturbance file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::vector<double> vals;
        double v;
        while (row >> v) vals.push_back(v);
        if (vals.empty()) continue;
        if (static_cast<Eigen::Index>(vals.size()) != m)
            throw DimensionMismatch("disturbance file " + path + " line " +
                                    std::to_string(lineno) + ": expected " +
                                    std::to_string(m) + " channels");
        s.rows.push_back(Eigen::Map<Vector>(vals.data(), m));
    }
    s.horizon = horizon > 0 ? horizon : static_cast<long>(s.rows.size());
    return s;
}

std::string DisturbanceSpec::label() const {
    switch (kind) {
        case DisturbanceKind::gaussian: return "gaussian";
        case DisturbanceKind::sine: return "sine";
        case DisturbanceKind::file: return "file";
    }
    return "?";
}

Vector gen_disturbance(const DisturbanceSpec& spec, Eigen::Index m, long t) {
    Vector w(m);
    switch (spec.kind) {
        case DisturbanceKind::gaussian: {
            for (Eigen::Index i = 0; i < m; ++i)
                w(i) = normal_draw(spec.seed,
                                   static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(m) +
                                       static_cast<std::uint64_t>(i));
            break;
        }
        case DisturbanceKind::sine: {
            for (Eigen::Index i = 0; i < m; ++i) {
                const double ph = i < static_cast<Eigen::Index>(spec.phase.size())
                                      ? spec.phase[static_cast<std::size_t>(i)]
                                      : 0.0;
                const double dir = spec.direction.empty()
                                       ? 1.0
                                       : spec.direction[static_cast<std::size_t>(i)];
                w(i) = spec.amplitude * dir * std::sin(spec.omega0 * t + ph);
            }
            break;
        }
        case DisturbanceKind::file: {
            if (t < 0 || static_cast<std::size_t>(t) >= spec.rows.size())
                throw FileExhausted("disturbance file exhausted at t = " + std::to_string(t));
            w = spec.rows[static_cast<std::size_t>(t)];
            break;
        }
    }
    return w;
}

SimResult simulate(const LtiSystem& sys, const ControllerRealization& ctrl,
                   const DisturbanceSpec& dist, int trials, std::uint64_t seed,
                   const SimExtras& extras) {
    sys.check_dimensions();
    if (trials < 1) throw DimensionMismatch("simulate: trials must be >= 1");
    const long T = dist.horizon;
    if (T < 1) throw DimensionMismatch("simulate: horizon must be >= 1");
    const bool feedback = ctrl.has_feedback_form();

    // Stability gate on the combined (controller, plant) state. A feedback
    // form closes over the true state; a transfer-only controller leaves the
    // plant block running open loop, so it needs a stable A.
    {
        const Eigen::Index q = feedback ? ctrl.Ac.rows() : ctrl.Ak.rows();
        const Eigen::Index nn = sys.n();
        Matrix Acl = Matrix::Zero(q + nn, q + nn);
        if (feedback) {
            Acl.topLeftCorner(q, q) = ctrl.Ac;
            if (q > 0 && ctrl.Cc.cols() == q) Acl.bottomLeftCorner(nn, q) = sys.B_u * ctrl.Cc;
            Acl.bottomRightCorner(nn, nn) = sys.A + sys.B_u * ctrl.Dx;
        } else {
            Acl.topLeftCorner(q, q) = ctrl.Ak;
            if (q > 0) Acl.bottomLeftCorner(nn, q) = sys.B_u * ctrl.Ck;
            Acl.bottomRightCorner(nn, nn) = sys.A;
        }
        if (spectral_radius(Acl) >= 1.0)
            throw UnstableLoop("simulate: closed loop is not stable");
    }

    long burn = extras.burn_in;
    if (burn < 0) burn = (dist.kind == DisturbanceKind::sine) ? 1000 : 0;
    if (burn >= T) burn = 0;

    const Eigen::Index n = sys.n();
    const Eigen::Index xi_dim = feedback ? ctrl.Ac.rows() : ctrl.Ak.rows();

    SimResult out;
    out.steps = T;
    out.burn_in = burn;
    out.trials = trials;
    out.running_avg.assign(static_cast<std::size_t>(trials),
                           std::vector<double>(static_cast<std::size_t>(T), 0.0));
    out.trial_final.assign(static_cast<std::size_t>(trials), 0.0);

    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t k) {
        DisturbanceSpec local = dist;
        if (dist.kind == DisturbanceKind::gaussian)
            local.seed = mix(seed, static_cast<std::uint64_t>(k));
        Vector x = Vector::Zero(n);
        Vector xi = Vector::Zero(xi_dim);
        double acc = 0.0;
        std::vector<double>& curve = out.running_avg[k];
        const bool record = extras.record_trajectories && k == 0;
        for (long t = 0; t < T; ++t) {
            Vector u;
            if (feedback) {
                u = ctrl.Dx * x;
                if (xi_dim > 0) u += ctrl.Cc * xi;
            } else {
                u = xi_dim > 0 ? Vector(ctrl.Ck * xi) : Vector(Vector::Zero(ctrl.Ck.rows()));
            }
            if (record) {
                out.x_traj.push_back(x);
                out.u_traj.push_back(u);
            }
            if (t >= burn) {
                acc += x.dot(sys.Q * x) + u.dot(sys.R * u);
                curve[static_cast<std::size_t>(t)] = acc / static_cast<double>(t - burn + 1);
            }
            const Vector w = gen_disturbance(local, sys.m(), t);
            const Vector x_next = sys.A * x + sys.B_u * u + sys.B_w * w;
            if (!x_next.allFinite() || x_next.norm() > 1e100)
                throw NonFiniteState("simulate: state diverged at t = " + std::to_string(t));
            if (xi_dim > 0) {
                if (feedback) {
                    const Vector d = x_next - sys.A * x - sys.B_u * u; // = B_w w_t
                    xi = ctrl.Ac * xi + ctrl.Bc * d;
                } else {
                    xi = ctrl.Ak * xi + ctrl.Bk * w;
                }
            }
            x = x_next;
        }
        out.trial_final[k] = curve[static_cast<std::size_t>(T - 1)];
    });

    double mean = 0.0;
    for (double v : out.trial_final) mean += v;
    mean /= trials;
    double var = 0.0;
    for (double v : out.trial_final) var += (v - mean) * (v - mean);
    out.mean = mean;
    out.stderr_mean = trials > 1 ? std::sqrt(var / (trials - 1)) / std::sqrt(double(trials)) : 0.0;
    return out;
}

void write_sim_csv(const SimResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    out << "t,trial,cost_avg\n";
    char buf[128];
    for (long t = 0; t < res.steps; ++t)
        for (int k = 0; k < res.trials; ++k) {
            std::snprintf(buf, sizeof(buf), "%ld,%d,%.17g\n", t, k,
                          res.running_avg[static_cast<std::size_t>(k)]
                                         [static_cast<std::size_t>(t)]);
            out << buf;
        }
}

void write_summary_csv(const std::vector<SimSummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    out << "controller,disturbance,mean,stderr,T,trials\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%ld,%d\n", r.controller.c_str(),
                      r.disturbance.c_str(), r.mean, r.stderr_mean, r.T, r.trials);
        out << buf;
    }
}

} // namespace compet
