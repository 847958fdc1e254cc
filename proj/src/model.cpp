#include "compet/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace compet {

namespace {

constexpr double kRankTolFactor = 1e-9; // rank_tol = 1e-9 * sigma_max

ComplexMatrix resolvent(const Matrix& A, std::complex<double> z) {
    const Eigen::Index n = A.rows();
    ComplexMatrix M = z * ComplexMatrix::Identity(n, n) - A.cast<std::complex<double>>();
    return M.partialPivLu().inverse();
}

} // namespace

void LtiSystem::check_dimensions() const {
    const Eigen::Index nn = A.rows();
    if (A.cols() != nn || B_u.rows() != nn || B_w.rows() != nn || Q.rows() != nn ||
        Q.cols() != nn || R.rows() != B_u.cols() || R.cols() != B_u.cols())
        throw DimensionMismatch("LtiSystem: inconsistent matrix dimensions");
    if (nn == 0) throw DimensionMismatch("LtiSystem: empty state");
}

bool ValidationReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  witness=" << c.witness;
        if (!c.detail.empty()) os << "  (" << c.detail << ")";
        os << "\n";
    }
    return os.str();
}

LtiSystem normalize_r(const LtiSystem& sys) {
    sys.check_dimensions();
    Matrix Rh_inv;
    try {
        Rh_inv = psd_inv_sqrt(sys.R);
    } catch (const NotPd&) {
        throw NotPd("normalize_r: R must be positive definite");
    }
    LtiSystem out = sys;
    out.B_u = sys.B_u * Rh_inv;
    out.R = Matrix::Identity(sys.p(), sys.p());
    return out;
}

ValidationReport validate(const LtiSystem& sys, int grid_points) {
    ValidationReport rep;
    sys.check_dimensions();
    const Eigen::Index n = sys.n();

    auto add = [&rep](std::string name, bool ok, double witness, std::string detail = {}) {
        rep.checks.push_back({std::move(name), ok, witness, std::move(detail)});
    };

    // Q, R positive definite.
    {
        Eigen::SelfAdjointEigenSolver<Matrix> esQ(symmetrize(sys.Q), Eigen::EigenvaluesOnly);
        add("Q_pd", esQ.eigenvalues().minCoeff() > 0, esQ.eigenvalues().minCoeff(),
            "min eigenvalue of Q");
        Eigen::SelfAdjointEigenSolver<Matrix> esR(symmetrize(sys.R), Eigen::EigenvaluesOnly);
        add("R_pd", esR.eigenvalues().minCoeff() > 0, esR.eigenvalues().minCoeff(),
            "min eigenvalue of R");
    }

    // Stabilizability, witnessed by a successful stabilizing DARE solve.
    {
        bool ok = false;
        double witness = std::numeric_limits<double>::infinity();
        try {
            const Matrix P = solve_dare(sys.A, sys.B_u, symmetrize(sys.Q), symmetrize(sys.R));
            const Matrix S = sys.R + sys.B_u.transpose() * P * sys.B_u;
            const Matrix K = S.ldlt().solve(sys.B_u.transpose() * P * sys.A);
            witness = spectral_radius(sys.A - sys.B_u * K);
            ok = witness < 1.0;
        } catch (const Error&) {
            ok = false;
        }
        add("stabilizable", ok, witness, "closed-loop spectral radius");
    }

    // B_w full column rank.
    {
        Eigen::JacobiSVD<Matrix> svd(sys.B_w);
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(svd.singularValues().size() - 1);
        const bool ok = sys.B_w.cols() <= sys.B_w.rows() && smin > kRankTolFactor * smax;
        add("Bw_full_rank", ok, smin, "min singular value of B_w");
    }

    // No eigenvalue of A with modulus 1 (frequency evaluation on the circle).
    double circle_margin;
    {
        const auto ev = sys.A.eigenvalues();
        circle_margin = (ev.cwiseAbs().array() - 1.0).abs().minCoeff();
        add("no_unit_circle_eigs", circle_margin > 1e-9, circle_margin,
            "min | |lambda| - 1 | over eigenvalues of A");
    }

    // G(e^{jw}) full column rank on the grid, one refinement pass at the min.
    {
        const bool q_ok = rep.checks.front().passed; // Q_pd, needed for the square root
        const Matrix Qh = q_ok ? psd_sqrt(symmetrize(sys.Q)) : Matrix();
        auto smin_at = [&](double omega) {
            const std::complex<double> z = std::polar(1.0, omega);
            return sigma_min(Qh.cast<std::complex<double>>() * resolvent(sys.A, z) *
                             sys.B_w.cast<std::complex<double>>());
        };
        double best = std::numeric_limits<double>::infinity();
        double best_w = 0.0;
        double sig_max = 0.0;
        if (!q_ok) {
            add("G_full_rank_on_grid", false, 0.0, "skipped: Q is not positive definite");
        } else if (circle_margin > 1e-9) {
            for (int k = 0; k < grid_points; ++k) {
                const double w = 2.0 * M_PI * k / grid_points;
                const std::complex<double> z = std::polar(1.0, w);
                const ComplexMatrix G = Qh.cast<std::complex<double>>() * resolvent(sys.A, z) *
                                        sys.B_w.cast<std::complex<double>>();
                const double lo = sigma_min(G);
                sig_max = std::max(sig_max, sigma_max(G));
                if (lo < best) {
                    best = lo;
                    best_w = w;
                }
            }
            const double h = 2.0 * M_PI / grid_points;
            for (int k = -8; k <= 8; ++k) best = std::min(best, smin_at(best_w + k * h / 8.0));
            add("G_full_rank_on_grid", best > kRankTolFactor * std::max(sig_max, 1e-300), best,
                "min over grid of sigma_min(G(e^{jw}))");
        } else {
            add("G_full_rank_on_grid", false, 0.0, "skipped: eigenvalue on the unit circle");
        }
    }

    return rep;
}

ControllerRealization ControllerRealization::from_feedback(const LtiSystem& sys, const Matrix& Ac,
                                                           const Matrix& Bc, const Matrix& Cc,
                                                           const Matrix& Dx) {
    const Eigen::Index q = Ac.rows();
    const Eigen::Index n = sys.n();
    ControllerRealization ctrl;
    ctrl.Ac = Ac;
    ctrl.Bc = Bc;
    ctrl.Cc = Cc;
    ctrl.Dx = Dx;
    // Transfer form closes the feedback law over the plant: combined state
    // (xi, x) driven by w.
    ctrl.Ak = Matrix::Zero(q + n, q + n);
    ctrl.Ak.topLeftCorner(q, q) = Ac;
    ctrl.Ak.bottomLeftCorner(n, q) = sys.B_u * Cc;
    ctrl.Ak.bottomRightCorner(n, n) = sys.A + sys.B_u * Dx;
    ctrl.Bk = Matrix::Zero(q + n, sys.m());
    ctrl.Bk.topRows(q) = Bc * sys.B_w;
    ctrl.Bk.bottomRows(n) = sys.B_w;
    ctrl.Ck = Matrix::Zero(Cc.rows() > 0 ? Cc.rows() : Dx.rows(), q + n);
    if (q > 0) ctrl.Ck.leftCols(q) = Cc;
    ctrl.Ck.rightCols(n) = Dx;
    return ctrl;
}

ControllerRealization ControllerRealization::from_transfer(const Matrix& Ak, const Matrix& Bk,
                                                           const Matrix& Ck) {
    ControllerRealization ctrl;
    ctrl.Ak = Ak;
    ctrl.Bk = Bk;
    ctrl.Ck = Ck;
    return ctrl;
}

ComplexMatrix ControllerRealization::eval(std::complex<double> z) const {
    if (Ak.rows() == 0) return ComplexMatrix::Zero(Ck.rows(), Bk.cols());
    return Ck.cast<std::complex<double>>() * resolvent(Ak, z) * Bk.cast<std::complex<double>>();
}

// ---------------------------------------------------------------------------
// Text format

std::string format_matrix(const Matrix& M) {
    std::ostringstream os;
    os << "[";
    char buf[64];
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        if (i > 0) os << "; ";
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) os << " ";
            std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
            os << buf;
        }
    }
    os << "]";
    return os.str();
}

Matrix parse_matrix(const std::string& text) {
    std::string body = text;
    const auto lb = body.find('[');
    const auto rb = body.rfind(']');
    if (lb == std::string::npos || rb == std::string::npos || rb < lb)
        throw ParseError("matrix literal must be enclosed in [ ]");
    body = body.substr(lb + 1, rb - lb - 1);
    std::vector<std::vector<double>> rows;
    std::stringstream rs(body);
    std::string rowtext;
    while (std::getline(rs, rowtext, ';')) {
        std::vector<double> row;
        std::stringstream es(rowtext);
        double v;
        while (es >> v) row.push_back(v);
        std::string trailing;
        es.clear();
        if (es >> trailing && !trailing.empty())
            throw ParseError("bad matrix entry: '" + trailing + "'");
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) return Matrix(0, 0);
    const size_t cols = rows[0].size();
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw ParseError("ragged matrix literal");
        for (size_t j = 0; j < cols; ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    if (!M.allFinite()) throw ParseError("non-finite matrix entry");
    return M;
}

namespace {

struct KeyValueFile {
    std::map<std::string, std::string> values;
    std::map<std::string, int> lines;

    static KeyValueFile read(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open file: " + path);
        KeyValueFile kv;
        std::string line;
        int lineno = 0;
        std::string pending_key;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            if (!pending_key.empty()) {
                // Continuation of a multi-line matrix literal: each new line
                // starts a new row unless a row separator is already present.
                const auto b = line.find_first_not_of(" \t\r");
                if (b != std::string::npos) {
                    const auto e = line.find_last_not_of(" \t\r");
                    const std::string frag = line.substr(b, e - b + 1);
                    std::string& acc = kv.values[pending_key];
                    const char last = acc.empty() ? '[' : acc.back();
                    if (last != '[' && last != ';' && frag.front() != ']') acc += "; ";
                    acc += frag;
                    if (frag.find(']') != std::string::npos) pending_key.clear();
                }
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t\r") != std::string::npos)
                    throw ParseError(path + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
                continue;
            }
            std::string key = line.substr(0, eq);
            std::string val = line.substr(eq + 1);
            auto trim = [](std::string& s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
            };
            trim(key);
            trim(val);
            if (key.empty())
                throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
            kv.values[key] = val;
            kv.lines[key] = lineno;
            if (val.find('[') != std::string::npos && val.find(']') == std::string::npos)
                pending_key = key;
        }
        return kv;
    }

    Matrix matrix(const std::string& key, const std::string& path) const {
        const auto it = values.find(key);
        if (it == values.end()) throw ParseError(path + ": missing key " + key);
        try {
            return parse_matrix(it->second);
        } catch (const ParseError& e) {
            const auto ln = lines.find(key);
            throw ParseError(path + ":" +
                             (ln == lines.end() ? "?" : std::to_string(ln->second)) + ": " +
                             e.what());
        }
    }
};

} // namespace

LtiSystem load_system(const std::string& path) {
    const KeyValueFile kv = KeyValueFile::read(path);
    LtiSystem sys;
    if (auto it = kv.values.find("name"); it != kv.values.end()) sys.name = it->second;
    sys.A = kv.matrix("A", path);
    sys.B_u = kv.matrix("B_u", path);
    sys.B_w = kv.matrix("B_w", path);
    sys.Q = kv.matrix("Q", path);
    sys.R = kv.matrix("R", path);
    sys.check_dimensions();
    return sys;
}

void save_system(const LtiSystem& sys, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path);
    if (!sys.name.empty()) out << "name = " << sys.name << "\n";
    out << "A = " << format_matrix(sys.A) << "\n";
    out << "B_u = " << format_matrix(sys.B_u) << "\n";
    out << "B_w = " << format_matrix(sys.B_w) << "\n";
    out << "Q = " << format_matrix(sys.Q) << "\n";
    out << "R = " << format_matrix(sys.R) << "\n";
}

ControllerRealization load_controller(const std::string& path) {
    const KeyValueFile kv = KeyValueFile::read(path);
    const auto kind = kv.values.find("kind");
    if (kind == kv.values.end()) throw ParseError(path + ": missing key kind");
    ControllerRealization ctrl;
    if (auto it = kv.values.find("name"); it != kv.values.end()) ctrl.name = it->second;
    if (kind->second == "feedback") {
        ctrl.Ac = kv.matrix("Ac", path);
        ctrl.Bc = kv.matrix("Bc", path);
        ctrl.Cc = kv.matrix("Cc", path);
        ctrl.Dx = kv.matrix("Dx", path);
    } else if (kind->second == "transfer") {
        ctrl.Ak = kv.matrix("Ak", path);
        ctrl.Bk = kv.matrix("Bk", path);
        ctrl.Ck = kv.matrix("Ck", path);
    } else {
        throw ParseError(path + ": kind must be feedback or transfer");
    }
    return ctrl;
}

void save_controller(const ControllerRealization& ctrl, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path);
    if (!ctrl.name.empty()) out << "name = " << ctrl.name << "\n";
    if (ctrl.has_feedback_form()) {
        out << "kind = feedback\n";
        out << "Ac = " << format_matrix(ctrl.Ac) << "\n";
        out << "Bc = " << format_matrix(ctrl.Bc) << "\n";
        out << "Cc = " << format_matrix(ctrl.Cc) << "\n";
        out << "Dx = " << format_matrix(ctrl.Dx) << "\n";
    } else {
        out << "kind = transfer\n";
        out << "Ak = " << format_matrix(ctrl.Ak) << "\n";
        out << "Bk = " << format_matrix(ctrl.Bk) << "\n";
        out << "Ck = " << format_matrix(ctrl.Ck) << "\n";
    }
}

} // namespace compet
