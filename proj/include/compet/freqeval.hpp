#pragma once

#include <utility>
#include <vector>

#include "compet/model.hpp"
#include "compet/pipeline.hpp"

namespace compet {

/// Uniform grid of `points` frequencies in [0, 2*pi).
std::vector<double> default_grid(int points = 1024);

/// Per-frequency clairvoyant cost matrix G*(I + F F*)^{-1} G at z = e^{jw},
/// with the R-normalized F.
ComplexMatrix clairvoyant_response(const LtiSystem& sys, double omega);

/// Stacked closed-loop disturbance-to-cost response [F K + G; R^{1/2} K] at
/// z = e^{jw}; controller must carry a transfer form.
ComplexMatrix transfer_TK(const LtiSystem& sys, const ControllerRealization& ctrl, double omega);

struct SupResult {
    double value = 0.0;
    double omega = 0.0;
};

/// (1/2pi) integral of trace(T_K* T_K) over the circle; periodic trapezoid on
/// the grid with one Richardson refinement.
double metric_frobenius(const LtiSystem& sys, const ControllerRealization& ctrl,
                        const std::vector<double>& grid);

/// sup over omega of lambda_max(T_K* T_K), golden-section refined around the
/// top grid maxima.
SupResult metric_opnorm(const LtiSystem& sys, const ControllerRealization& ctrl,
                        const std::vector<double>& grid);

/// sup over omega of lambda_max(T_K* T_K - T_K0* T_K0).
SupResult metric_regret(const LtiSystem& sys, const ControllerRealization& ctrl,
                        const std::vector<double>& grid);

/// sup over omega of lambda_max(M^{-*} T_K* T_K M^{-1}).
SupResult metric_cr(const LtiSystem& sys, const ControllerRealization& ctrl,
                    const std::vector<double>& grid);

struct ControllerMetrics {
    std::string name;
    // Per-grid-point squared densities.
    std::vector<double> frob_density, opnorm, regret, cr;
    SupResult sup_opnorm, sup_regret, sup_cr;
    double frobenius = 0.0;
};

struct FrequencyMetrics {
    std::vector<double> grid;
    std::vector<ControllerMetrics> per_controller;
};

using NamedControllers = std::vector<std::pair<std::string, ControllerRealization>>;

/// One evaluation pass over the grid for a set of controllers; shares the
/// clairvoyant term and the disturbance spectral factor across controllers.
FrequencyMetrics evaluate_all(const LtiSystem& sys, const NamedControllers& ctrls,
                              const std::vector<double>& grid);

/// Metrics of the clairvoyant benchmark itself: regret identically 0 and
/// competitive ratio identically 1; frobenius/opnorm from the clairvoyant
/// cost matrix.
ControllerMetrics clairvoyant_metrics(const LtiSystem& sys, const std::vector<double>& grid);

/// CSV rows `omega,controller,frob_density,opnorm,regret,cr`.
void write_sweep_csv(const FrequencyMetrics& metrics, const std::string& path);

} // namespace compet
