#pragma once

#include <optional>
#include <string>
#include <vector>

#include "compet/numerics.hpp"

namespace compet {

/// Discrete-time LTI plant x_{t+1} = A x_t + B_u u_t + B_w w_t with quadratic
/// stage cost x'Qx + u'Ru.
struct LtiSystem {
    std::string name;
    Matrix A;   // n x n
    Matrix B_u; // n x p
    Matrix B_w; // n x m
    Matrix Q;   // n x n, pd
    Matrix R;   // p x p, pd

    Eigen::Index n() const { return A.rows(); }
    Eigen::Index p() const { return B_u.cols(); }
    Eigen::Index m() const { return B_w.cols(); }

    void check_dimensions() const;
};

struct ValidationCheck {
    std::string name;
    bool passed = false;
    double witness = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_passed() const;
    const ValidationCheck* find(const std::string& name) const;
    std::string to_string() const;
};

/// Rescales so that R = I; B_u' = B_u R^{-1/2}. Controllers designed for the
/// normalized system act on the original one through u = R^{-1/2} u'.
LtiSystem normalize_r(const LtiSystem& sys);

/// Runs the standing-assumption checks: Q, R pd; (A, B_u) stabilizable; B_w
/// full column rank; no eigenvalue of A on the unit circle; G(e^{jw}) full
/// column rank on a sampled frequency grid.
ValidationReport validate(const LtiSystem& sys, int grid_points = 256);

/// Strictly causal controller, emitted in two equivalent forms.
/// Feedback form: xi_{t+1} = Ac xi_t + Bc (B_w w_t), u_t = Cc xi_t + Dx x_t,
/// where B_w w_t may be reconstructed as x_{t+1} - A x_t - B_u u_t.
/// Transfer form: u = Ck (zI - Ak)^{-1} Bk w.
struct ControllerRealization {
    std::string name;
    Matrix Ac, Bc, Cc, Dx;
    Matrix Ak, Bk, Ck;

    /// Builds the transfer form by closing the feedback form over the plant.
    static ControllerRealization from_feedback(const LtiSystem& sys, const Matrix& Ac,
                                               const Matrix& Bc, const Matrix& Cc,
                                               const Matrix& Dx);
    /// Pure transfer-form controller (feedback form left empty).
    static ControllerRealization from_transfer(const Matrix& Ak, const Matrix& Bk,
                                               const Matrix& Ck);

    bool has_feedback_form() const { return Dx.size() > 0; }
    ComplexMatrix eval(std::complex<double> z) const;
};

// Line-oriented text formats (17 significant digits, '#' comments).
LtiSystem load_system(const std::string& path);
void save_system(const LtiSystem& sys, const std::string& path);
ControllerRealization load_controller(const std::string& path);
void save_controller(const ControllerRealization& ctrl, const std::string& path);

std::string format_matrix(const Matrix& M);
Matrix parse_matrix(const std::string& text); // "[a b; c d]"

} // namespace compet
