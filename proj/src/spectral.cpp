#include "surge/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace surge {

double SpectralData::wdot(const Vector& a, const Vector& b) const {
    return (weights.array() * a.array() * b.array()).sum();
}

Complex SpectralData::wdot(const ComplexVector& a, const ComplexVector& b) const {
    return (weights.cast<Complex>().array() * a.array() * b.array()).sum();
}

namespace {

Vector demand_real(const ComplexVector& v, const char* what) {
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale > 0.0 && v.imag().cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw NumericsError(std::string(what) + " is not real");
    return v.real();
}

} // namespace

Vector SpectralData::real_mode(int k) const {
    if (k < 0 || k >= size()) throw NumericsError("mode index out of range");
    return demand_real(right_modes.col(k), "requested mode");
}

Vector SpectralData::real_left_mode(int k) const {
    if (k < 0 || k >= size()) throw NumericsError("mode index out of range");
    return demand_real(left_modes.col(k), "requested adjoint mode");
}

Vector SpectralData::apply_pseudo_inverse(const Vector& f) const {
    const double proj = wdot(f, h0_star);
    const double fnorm = f.cwiseAbs().maxCoeff();
    if (std::abs(proj) > tol::solvable(fnorm))
        throw NumericsError("not solvable: source has a zero-mode component of " +
                            format_double(proj));
    Vector rhs(size() + 1);
    rhs.head(size()) = f;
    rhs[size()] = 0.0;
    Vector sol = bordered_.solve(rhs);
    return sol.head(size());
}

Matrix SpectralData::relaxation_exponential(double t) const {
    const int m = size();
    ComplexMatrix out = ComplexMatrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        const ComplexVector wl =
            (weights.cast<Complex>().array() * left_modes.col(i).array()).matrix();
        out += std::exp(eigenvalues[i] * t) * right_modes.col(i) * wl.transpose();
    }
    return out.real();
}

SpectralData eigendecompose(const Matrix& relaxation, const Vector& weights) {
    const int m = static_cast<int>(relaxation.rows());
    if (relaxation.cols() != m || weights.size() != m)
        throw NumericsError("eigendecompose: dimension mismatch");

    Eigen::EigenSolver<Matrix> es(relaxation);
    if (es.info() != Eigen::Success)
        throw NumericsError("eigendecompose: eigenvalue iteration failed");
    ComplexVector lam = es.eigenvalues();
    ComplexMatrix vec = es.eigenvectors();

    // zero mode first, then by descending real part, |Im| ascending,
    // non-negative imaginary part leading its conjugate
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    const int i0 = static_cast<int>(
        std::min_element(order.begin(), order.end(),
                         [&](int a, int b) { return std::abs(lam[a]) < std::abs(lam[b]); }) -
        order.begin());
    order.erase(order.begin() + i0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (lam[a].real() != lam[b].real()) return lam[a].real() > lam[b].real();
        double ia = std::abs(lam[a].imag()), ib = std::abs(lam[b].imag());
        if (ia != ib) return ia < ib;
        return lam[a].imag() > lam[b].imag();
    });
    order.insert(order.begin(), i0);

    SpectralData sd;
    sd.relaxation = relaxation;
    sd.weights = weights;
    sd.eigenvalues.resize(m);
    sd.right_modes.resize(m, m);
    for (int i = 0; i < m; ++i) {
        sd.eigenvalues[i] = lam[order[i]];
        ComplexVector v = vec.col(order[i]);
        int jmax = 0;
        v.cwiseAbs().maxCoeff(&jmax);
        if (std::abs(v[jmax]) == 0.0)
            throw NumericsError("eigendecompose: null eigenvector");
        sd.right_modes.col(i) = v / v[jmax];
    }

    const double l_norm = relaxation.cwiseAbs().rowwise().sum().maxCoeff();
    sd.zero_residual = std::abs(sd.eigenvalues[0]);
    if (sd.zero_residual <= tol::zero_eigenvalue(l_norm)) sd.eigenvalues[0] = 0.0;

    Eigen::FullPivLU<ComplexMatrix> rlu(sd.right_modes);
    if (!rlu.isInvertible())
        throw NumericsError("eigendecompose: mode matrix is singular (not diagonalizable)");
    const ComplexMatrix vinv = rlu.inverse();
    sd.left_modes.resize(m, m);
    for (int i = 0; i < m; ++i)
        sd.left_modes.col(i) =
            (vinv.row(i).transpose().array() / weights.cast<Complex>().array()).matrix();

    sd.h0 = demand_real(sd.right_modes.col(0), "zero mode");
    sd.h0_star = demand_real(sd.left_modes.col(0), "adjoint zero mode");

    sd.gap = 0.0;
    for (int i = 1; i < m; ++i)
        sd.gap = (i == 1) ? -sd.eigenvalues[i].real()
                          : std::min(sd.gap, -sd.eigenvalues[i].real());

    Matrix bordered(m + 1, m + 1);
    bordered.setZero();
    bordered.topLeftCorner(m, m) = relaxation;
    bordered.topRightCorner(m, 1) = sd.h0;
    bordered.bottomLeftCorner(1, m) =
        (sd.weights.array() * sd.h0_star.array()).matrix().transpose();
    sd.bordered_.compute(bordered);
    return sd;
}

double frame_slowness(const SpectralData& sd, const Vector& speeds) {
    const double num = sd.wdot(sd.h0, sd.h0_star);
    const double den = sd.wdot((speeds.array() * sd.h0.array()).matrix(), sd.h0_star);
    if (std::abs(den) < tol::strict_floor)
        throw NumericsError("frame slowness undefined: speed pairing vanishes");
    return num / den;
}

Vector speed_fluctuation(const SpectralData& sd, const Vector& speeds) {
    const double mean = sd.wdot((speeds.array() * sd.h0.array()).matrix(), sd.h0_star) /
                        sd.wdot(sd.h0, sd.h0_star);
    return (speeds.array() - mean).matrix();
}

DiffusionInfo effective_diffusion(const SpectralData& sd, const Vector& speeds) {
    DiffusionInfo info;
    const Vector psi = speed_fluctuation(sd, speeds);
    info.v1 = sd.apply_pseudo_inverse((psi.array() * sd.h0.array()).matrix());
    info.g = sd.wdot((psi.array() * info.v1.array()).matrix(), sd.h0_star);
    const double b = frame_slowness(sd, speeds);
    info.mu = -b * b * info.g;
    return info;
}

bool ConditionReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ConditionCheck& c) { return c.passed; });
}

const ConditionCheck& ConditionReport::find(const std::string& id) const {
    for (const auto& c : checks)
        if (c.id == id) return c;
    throw NumericsError("unknown condition id '" + id + "'");
}

namespace {

std::string fmt(double v) { return format_double(v); }

} // namespace

ConditionReport check_conditions(const ProblemSpec& spec) {
    ConditionReport rep;
    auto add = [&](std::string id, bool ok, std::string detail) {
        rep.checks.push_back({std::move(id), ok, std::move(detail)});
    };

    const double l_norm = spec.relaxation.cwiseAbs().rowwise().sum().maxCoeff();

    bool have_sd = false;
    SpectralData sd;
    std::string sd_error;
    try {
        sd = eigendecompose(spec.relaxation, spec.weights);
        have_sd = true;
    } catch (const NumericsError& e) {
        sd_error = e.what();
    }

    if (have_sd) {
        add("spectral-gap",
            sd.zero_residual <= tol::zero_eigenvalue(l_norm) && sd.gap > 0.0,
            "smallest |eigenvalue| = " + fmt(sd.zero_residual) +
                ", decay rate of the rest = " + fmt(sd.gap));

        const Vector h0_unit = sd.h0 / sd.h0.cwiseAbs().maxCoeff();
        const Vector h0s_unit = sd.h0_star / sd.h0_star.cwiseAbs().maxCoeff();
        const double pairing = sd.wdot(h0_unit, h0s_unit);
        add("mode-pairing", std::abs(pairing) >= tol::pair,
            "normalized zero-mode pairing = " + fmt(pairing));

        std::string diff_detail;
        bool diff_ok = false;
        try {
            const DiffusionInfo info = effective_diffusion(sd, spec.speeds);
            diff_ok = info.g < -tol::strict_floor;
            diff_detail = "dispersion pairing g = " + fmt(info.g) +
                          ", effective diffusivity = " + fmt(info.mu);
        } catch (const NumericsError& e) {
            diff_detail = e.what();
        }
        add("negative-dispersion", diff_ok, diff_detail);
    } else {
        add("spectral-gap", false, sd_error);
        add("mode-pairing", false, sd_error);
        add("negative-dispersion", false, sd_error);
    }

    add("positive-weights", spec.weights.minCoeff() > 0.0,
        "smallest weight = " + fmt(spec.weights.minCoeff()));

    if (have_sd) {
        double min_sep = std::numeric_limits<double>::infinity();
        for (int i = 0; i < sd.size(); ++i)
            for (int j = i + 1; j < sd.size(); ++j)
                min_sep = std::min(min_sep, std::abs(sd.eigenvalues[i] - sd.eigenvalues[j]));
        add("distinct-eigenvalues", min_sep > tol::distinct(l_norm),
            "smallest eigenvalue separation = " + fmt(min_sep));
    } else {
        add("distinct-eigenvalues", false, sd_error);
    }

    {
        std::string detail;
        bool ok = true;
        try {
            const DecayCertificate cert = validate_initial_decay(spec);
            if (cert.envelope == 0.0) {
                detail = "no initial data";
            } else {
                detail = "amplitude envelope = " + fmt(cert.envelope) +
                         ", slowest decay rate = " + fmt(cert.beta_min);
            }
        } catch (const ConfigError& e) {
            ok = false;
            detail = e.what();
        }
        add("initial-decay", ok, detail);
    }

    {
        double min_offdiag = std::numeric_limits<double>::infinity();
        for (int i = 0; i < spec.m; ++i)
            for (int j = 0; j < spec.m; ++j)
                if (i != j) min_offdiag = std::min(min_offdiag, spec.relaxation(i, j));
        const double witness = spec.relaxation.diagonal().minCoeff() - 1.0;
        add("offdiag-nonnegative", min_offdiag >= 0.0,
            "smallest off-diagonal entry = " + fmt(min_offdiag) +
                ", comparison shift = " + fmt(witness));
    }

    if (have_sd) {
        const double lo = sd.h0.minCoeff();
        const double hi = sd.h0.maxCoeff();
        const bool one_signed = (lo > tol::strict_floor) ||
                                (hi < -tol::strict_floor);
        add("one-signed-zero-mode", one_signed,
            "zero-mode entry range = [" + fmt(lo) + ", " + fmt(hi) + "]");
    } else {
        add("one-signed-zero-mode", false, sd_error);
    }

    return rep;
}

} // namespace surge
