#pragma once

#include "surge/model.hpp"
#include "surge/spectral.hpp"

namespace surge {

// Slow amplitude phi(zeta, t), stored as uniform time snapshots on a uniform
// zeta grid (one column per snapshot).  Queries interpolate cubically in both
// axes.  Outside the zeta grid the profile evaluates to zero provided the
// stored edge tail is below tol::profile_tail; otherwise the grid was too
// small for the query and GridError reports the extent that would be needed.
struct AmplitudeProfile {
    double zeta0 = 0.0;  // leftmost node
    double dzeta = 0.0;
    double t0 = 0.0;
    double dt = 0.0;     // snapshot spacing
    Matrix values;       // nz x nt
    Matrix slopes;       // nz x nt, d(phi)/d(zeta)
    double tail = 0.0;   // max |phi| over edge nodes across all snapshots

    bool empty() const { return values.size() == 0; }
    int nodes() const { return static_cast<int>(values.rows()); }
    int snapshots() const { return static_cast<int>(values.cols()); }
    double zeta_max() const { return zeta0 + (nodes() - 1) * dzeta; }

    double eval(double zeta, double t) const;
    double eval_slope(double zeta, double t) const;
};

struct ExpansionOptions {
    int order = 0;        // truncation order N (0 or 1)
    double dzeta = 0.01;  // amplitude grid spacing
    double zeta_half = 0.0; // half-width of the amplitude grid; <= 0 -> auto
    int snapshots = 512;  // stored time levels (including t = 0)
};

// Two-scale approximation
//   U_N(x, t; eps) = sum_{i<=N} eps^i [ s_i(zeta, t) + p_i(xi, tau) ],
//   zeta = (t - B x)/eps,  xi = x/eps,  tau = t/eps^2.
// The travelling parts s_i ride on numerically evolved amplitudes; the
// relaxation parts p_i are closed-form in the eigensystem.
struct Expansion {
    int order = 0;
    ProblemSpec spec;
    SpectralData sd;
    double slowness = 0.0;     // B, frame time per unit length
    DiffusionInfo diffusion;   // v1, g, mu
    double fbar_lin = 0.0;     // projected reaction, linear coefficient
    double fbar_quad = 0.0;    // projected reaction, quadratic coefficient
    // first-order amplitude source rho1 = src_third * phi0''' +
    // src_first * phi0' + src_mixed * phi0 * phi0'
    double src_third = 0.0;
    double src_first = 0.0;
    double src_mixed = 0.0;

    AmplitudeProfile phi0;
    AmplitudeProfile phi1; // empty when order == 0

    Vector surge0(double zeta, double t) const;
    Vector surge1(double zeta, double t) const;
    Vector layer0(double xi, double tau) const;
    Vector layer1(double xi, double tau) const;

    Vector evaluate(double x, double t, double eps) const;

    // Modal coefficient a_i(xi, tau) of the first-order relaxation part.
    Complex layer1_coefficient(int i, double xi, double tau) const;

private:
    friend Expansion build_expansion(const ProblemSpec&, const ExpansionOptions&);
    ComplexMatrix pair_speed_;  // (D h_j, h_i*)
    ComplexVector pair_v1_;     // (v1, h_i*)
    std::vector<int> sources_;  // modes j >= 1 carrying initial data
    Matrix source_modes_;       // columns: real h_j, j in sources_
    Vector source_rates_;       // real lambda_j, j in sources_
};

Expansion build_expansion(const ProblemSpec& spec, const ExpansionOptions& opt = {});

// Half-width rule for the amplitude grid:
// |B| (max |z0| + 8/sqrt(beta_min)) + 8 sqrt(mu T) + 1.
double amplitude_half_width(const ProblemSpec& spec, double slowness, double mu);

} // namespace surge
