#pragma once

#include "surge/common.hpp"

#include <vector>

namespace surge {

struct SpectralData; // spectral.hpp

/// One Gaussian bump A * exp(-beta * (z - z0)^2), beta > 0.
struct GaussianBump {
    double amplitude = 0.0;
    double beta = 1.0;
    double center = 0.0;

    double operator()(double z) const;
    double derivative(double z) const;
};

/// Initial profile of one eigenmode: a finite sum of Gaussian bumps.
struct ModeProfile {
    std::vector<GaussianBump> bumps;

    double eval(double z) const;
    double deriv(double z) const;
    bool is_zero() const { return bumps.empty(); }
};

/// Per-state quadratic reaction F_j(u) = c1_j u_j + c2_j u_j^2.
struct Nonlinearity {
    Vector c1;
    Vector c2;

    Vector eval(const Vector& u) const;
    /// Diagonal of the Jacobian, F'_j(u) = c1_j + 2 c2_j u_j.
    Vector jacobian_diag(const Vector& u) const;
    /// sup of |F'| over per-state values bounded by `amp`.
    double max_abs_derivative(double amp) const;
    bool is_zero() const;
};

/// Validated description of one transport-relaxation problem:
/// states p = 0..m-1, speeds D, relaxation operator L, inner-product
/// weights, per-state quadratic reaction and mode-indexed initial data.
struct ProblemSpec {
    int m = 0;
    Vector speeds;               // D, |D_j| >= speed_floor > 0
    Matrix relaxation;           // L, m x m
    Vector weights;              // positive inner-product weights
    Nonlinearity nonlinearity;
    std::vector<ModeProfile> initial_modes; // size m, indexed by eigenmode
    double horizon = 0.0;        // T

    /// D0 = min_j |D_j|.
    double speed_floor() const;
    /// Weighted inner product (a, b) = sum_j weights_j a_j b_j.
    double dot(const Vector& a, const Vector& b) const;
};

/// Parse a problem document (see README for the grammar). Throws ConfigError
/// with the offending line/field on malformed input or failed validation.
ProblemSpec load_problem(const std::string& text);
ProblemSpec load_problem_file(const std::string& path);

/// Full-precision re-serialization; load_problem(serialize_problem(s)) == s bitwise.
std::string serialize_problem(const ProblemSpec& spec);

/// Gaussian-decay certificate of the initial data: envelope C = sum of |A|
/// over all bumps, beta_min = smallest width parameter. No bumps at all
/// yields {0, +infinity}.
struct DecayCertificate {
    double envelope = 0.0;
    double beta_min = 0.0;
};
DecayCertificate validate_initial_decay(const ProblemSpec& spec);

/// Uniformly gridded m-state field (rows: grid nodes, cols: states).
struct GridField {
    Vector x;
    Matrix values;

    double dx() const;
    static GridField create(Vector x, Matrix values); // validates
};

/// Sample w(xi) = sum_i w_i(xi) h_i on the given grid. Modes with a
/// nonzero profile must be real eigenmodes of the operator.
GridField sample_initial(const ProblemSpec& spec, const SpectralData& sd,
                         const Vector& xi_grid);

/// Half-width W of the truncated x-domain [-W, W]: the decay margin
/// 6/sqrt(beta_min) plus the domain of influence over the horizon.
double domain_half_width(const ProblemSpec& spec);

/// Uniform grid of n nodes on [lo, hi].
Vector linspace(double lo, double hi, int n);

} // namespace surge
