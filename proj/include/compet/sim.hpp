#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "compet/model.hpp"

namespace compet {

enum class DisturbanceKind { gaussian, sine, file };

/// Disturbance source. Gaussian draws are counter-based (pure in (seed, t)),
/// so trials and time steps can be generated in any order.
struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::gaussian;
    long horizon = 1;
    std::uint64_t seed = 0;

    // sine parameters
    double omega0 = 0.0;
    double amplitude = 1.0;
    std::vector<double> phase;     // per-channel phase offsets (empty = all zero)
    std::vector<double> direction; // optional per-channel scaling (empty = all one)

    // file parameters
    std::string path;
    std::vector<Vector> rows;

    static DisturbanceSpec gaussian(std::uint64_t seed, long horizon);
    static DisturbanceSpec sine(double omega0, double amplitude, long horizon);
    static DisturbanceSpec from_file(const std::string& path, Eigen::Index m, long horizon = -1);

    std::string label() const; // "gaussian" | "sine" | "file"
};

/// w_t for channel count m; throws FileExhausted past the end of file data.
Vector gen_disturbance(const DisturbanceSpec& spec, Eigen::Index m, long t);

struct SimResult {
    // running_avg[trial][t] = (1/(t-burn+1)) sum_{s=burn..t} (x'Qx + u'Ru),
    // zero before the burn-in index.
    std::vector<std::vector<double>> running_avg;
    std::vector<double> trial_final;
    double mean = 0.0;
    double stderr_mean = 0.0;
    long steps = 0;
    long burn_in = 0;
    int trials = 0;
    // First-trial trajectories, recorded on request.
    std::vector<Vector> x_traj, u_traj;
};

struct SimExtras {
    long burn_in = -1; // -1: 1000 for sine inputs, 0 otherwise
    bool record_trajectories = false;
};

/// Closed-loop rollout from x0 = 0. Feedback-form controllers consume
/// B_w w_t reconstructed as x_{t+1} - A x_t - B_u u_t; transfer-form
/// controllers are driven by w_t directly (and then require a stable A).
SimResult simulate(const LtiSystem& sys, const ControllerRealization& ctrl,
                   const DisturbanceSpec& dist, int trials, std::uint64_t seed,
                   const SimExtras& extras = {});

/// CSV `t,trial,cost_avg`.
void write_sim_csv(const SimResult& res, const std::string& path);

struct SimSummaryRow {
    std::string controller;
    std::string disturbance;
    double mean = 0.0;
    double stderr_mean = 0.0;
    long T = 0;
    int trials = 0;
};
/// CSV `controller,disturbance,mean,stderr,T,trials`.
void write_summary_csv(const std::vector<SimSummaryRow>& rows, const std::string& path);

} // namespace compet
