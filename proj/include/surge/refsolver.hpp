#pragma once

#include "surge/model.hpp"
#include "surge/spectral.hpp"

#include <array>
#include <functional>
#include <vector>

namespace surge {

enum class InterpKind { cubic, linear, clamped };

struct StepperOptions {
    double eps = 1.0;
    double cfl = 0.9;
    InterpKind interp = InterpKind::cubic;
};

/// Optional external forcing f(x, t, state), applied forward-Euler per step.
using SourceFn = std::function<double(double, double, int)>;

// Split-step integrator for  eps^2 (u_t + D u_x) = L u + eps^2 F(u) + eps^2 f:
// per step, half advection | half reaction | full relaxation | half reaction |
// half advection, then the external source.  Advection is semi-Lagrangian
// with a constant per-state shift (zero inflow at the edges); relaxation
// applies exp(L dt / eps^2) assembled from the eigensystem; the per-state
// quadratic reaction uses its closed-form flow, so the only discretization
// errors are interpolation and operator splitting.
class ReferenceStepper {
public:
    ReferenceStepper(Vector x, const Matrix& relaxation, const Vector& speeds,
                     const Nonlinearity& reaction, StepperOptions opt);

    void set_source(SourceFn f) { source_ = std::move(f); }

    /// Advances `values` (nodes x states) in place from t_from to t_to.
    void advance(Matrix& values, double t_from, double t_to);

    const Vector& x() const { return x_; }
    double dx() const { return dx_; }
    double nominal_dt() const { return dt_nominal_; }
    long steps_taken() const { return steps_; }

private:
    void prepare(double dt);
    void step(Matrix& values, double t, double dt);
    void advect_half(Matrix& values);
    void react_half(Matrix& values);

    Vector x_;
    double dx_;
    Matrix relaxation_;
    Vector speeds_;
    Nonlinearity reaction_;
    SpectralData sd_;
    StepperOptions opt_;
    SourceFn source_;

    double dt_nominal_ = 0.0;
    double dt_current_ = -1.0;
    Matrix expm_t_;                                // exp(L dt/eps^2)^T
    std::vector<long> shift_base_;                 // per state
    std::vector<std::array<double, 4>> shift_w_;   // per state interp weights
    Vector react_growth_;                          // e^{c1 dt/2} per state
    Vector react_accum_;                           // (e^{c1 dt/2} - 1)/c1
    Vector scratch_;
    long steps_ = 0;
};

struct SolveOptions {
    double dx = 0.0;         // <= 0: 0.25 eps^2
    double cfl = 0.9;
    double half_width = 0.0; // <= 0: domain_half_width(spec)
    InterpKind interp = InterpKind::cubic;
};

struct SolveResult {
    Vector x;
    std::vector<double> times;
    std::vector<Matrix> states; // one per recorded time, nodes x states
    double dx = 0.0;
    double dt = 0.0;
    long steps = 0;
};

/// Solves the full stiff system from the problem's initial data and records
/// the state at each requested time (sorted, within [0, T]).
SolveResult solve_reference(const ProblemSpec& spec, double eps,
                            std::vector<double> record_times,
                            const SolveOptions& opt = {});

} // namespace surge
