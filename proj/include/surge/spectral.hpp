#pragma once

#include "surge/common.hpp"
#include "surge/model.hpp"

#include <Eigen/LU>

#include <string>
#include <vector>

namespace surge {

// Eigenstructure of the relaxation operator together with the weighted
// bilinear pairing <a,b> = sum_j w_j a_j b_j (no conjugation).  The spectrum
// is sorted so that index 0 carries the simple zero eigenvalue; the remaining
// modes follow by descending real part, then ascending |Im|, with the
// Im >= 0 member of each conjugate pair first.  Left and right modes satisfy
// <h_i, h_k*> = delta_ik exactly by construction.
struct SpectralData {
    Matrix relaxation;
    Vector weights;
    ComplexVector eigenvalues;
    ComplexMatrix right_modes; // columns h_i
    ComplexMatrix left_modes;  // columns h_i*
    Vector h0;                 // real zero mode, <h0, h0*> = 1
    Vector h0_star;
    double gap = 0.0;           // -max Re(lambda_i), i >= 1
    double zero_residual = 0.0; // |smallest eigenvalue| before snapping to 0

    int size() const { return static_cast<int>(weights.size()); }

    double wdot(const Vector& a, const Vector& b) const;
    Complex wdot(const ComplexVector& a, const ComplexVector& b) const;

    // Right/left modes known to be real; throws NumericsError otherwise.
    Vector real_mode(int k) const;
    Vector real_left_mode(int k) const;

    // Solves L y = f on the complement of the zero mode, with <y, h0*> = 0.
    // Throws NumericsError("not solvable") unless <f, h0*> vanishes.
    Vector apply_pseudo_inverse(const Vector& f) const;

    // exp(L t), assembled from the eigensystem; real output.
    Matrix relaxation_exponential(double t) const;

private:
    friend SpectralData eigendecompose(const Matrix&, const Vector&);
    Eigen::PartialPivLU<Matrix> bordered_; // [[L, h0], [(W h0*)^T, 0]]
};

SpectralData eigendecompose(const Matrix& relaxation, const Vector& weights);

// Slowness of the travelling frame: <h0, h0*> / <D h0, h0*> (= 1/<D h0, h0*>
// after normalisation).
double frame_slowness(const SpectralData& sd, const Vector& speeds);

// Componentwise speed fluctuation D - <D h0, h0*> around the frame speed.
Vector speed_fluctuation(const SpectralData& sd, const Vector& speeds);

struct DiffusionInfo {
    Vector v1;  // pseudo-inverse of (speed fluctuation ∘ h0)
    double g;   // <fluct ∘ v1, h0*>; must be negative for well-posedness
    double mu;  // effective diffusivity, -B^2 g
};

DiffusionInfo effective_diffusion(const SpectralData& sd, const Vector& speeds);

// Structural admissibility checks on a problem.  Each check reports a stable
// identifier, a verdict, and a human-readable detail line with the measured
// quantity that decided it.
struct ConditionCheck {
    std::string id;     // "spectral-gap", "mode-pairing", ...
    bool passed = false;
    std::string detail;
};

struct ConditionReport {
    std::vector<ConditionCheck> checks;
    bool all_passed() const;
    const ConditionCheck& find(const std::string& id) const;
};

ConditionReport check_conditions(const ProblemSpec& spec);

} // namespace surge
