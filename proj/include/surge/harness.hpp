#pragma once

#include "surge/expansion.hpp"
#include "surge/refsolver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace surge {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // largest absolute log-residual of the fit
};

/// Least-squares line through (ln eps_i, ln value_i). Needs at least two
/// strictly positive samples.
FitResult fit_slope(const std::vector<double>& eps, const std::vector<double>& values);

/// Any state field (x, t) -> m-vector, e.g. a truncated expansion.
using FieldFn = std::function<Vector(double, double)>;

/// Residual of the full system at one point, with centered differences of
/// steps hx (space) and ht (time; needs t >= ht):
///   eps^2 (u_t + D u_x) - L u - eps^2 F(u).
Vector defect_at(const ProblemSpec& spec, double eps, const FieldFn& field,
                 double x, double t, double hx, double ht);

/// Sup norm of the defect of the truncated expansion, sampled near the
/// moving pulse and inside the initial-layer window at the given times.
double expansion_defect_sup(const Expansion& exp, double eps,
                            const std::vector<double>& times);

struct SweepOptions {
    int order = 0;
    std::vector<double> eps_values; // strictly decreasing, at least three
    double slack = 0.3;             // slope slack used by theorem_check
    double t0_cap = 0.5;            // evaluation horizon cap
    double dx_factor = 0.0;         // reference grid dx = dx_factor * eps^2;
                                    // <= 0: 0.25 (order 0) or 0.125 (order 1),
                                    // keeping the scheme error well below the
                                    // order's model error
    double dzeta = 0.0;             // <= 0: resolution rule from smallest eps
    InterpKind interp = InterpKind::cubic;
    int threads = 0;                // <= 0: one worker per eps value
};

struct SweepEntry {
    double eps = 0.0;
    double dx = 0.0;
    double error = 0.0;      // sup_x,t |u_ref - u_expansion|
    double defect = 0.0;     // sup of the sampled equation residual
    double separation = 0.0; // bound on the reference's own scheme error:
                             // distance between nested Richardson extrapolants
    double ratio = 0.0;      // error / eps^(order+1)
};

struct ConvergenceReport {
    int order = 0;
    double t0 = 0.0;        // evaluation horizon
    double zeta_half = 0.0; // pulse-window half-width (pulse frame)
    double xi_scale = 0.0;  // layer-window half-width in units of eps
    double dzeta = 0.0;     // amplitude-grid resolution actually used
    std::vector<SweepEntry> entries;
    double slope = 0.0;
    double intercept = 0.0;
    double fit_residual = 0.0;
    double defect_slope = 0.0; // reported, not gated
    double c_hat = 0.0;        // max over entries of error / eps^(order+1)
    bool separation_ok = false; // scheme error << model error everywhere
    bool monotone = false;      // errors strictly decreasing in eps
};

/// Solves the full system for every eps, evaluates the truncated expansion on
/// the sampled windows and returns the measured convergence data.
ConvergenceReport error_sweep(const ProblemSpec& spec, const SweepOptions& opt);

struct TheoremVerdict {
    bool passed = false;
    std::string detail;
};

/// Remainder-estimate verdict: fitted slope >= order + 1 - slack, the
/// normalized errors stay within a factor 10 band, errors decrease
/// monotonically and the reference scheme is resolved everywhere.
TheoremVerdict theorem_check(const ConvergenceReport& rep, double slack);

/// Writes errors.csv, manifest.csv and plot_errors.py under out_dir
/// (created if missing). Output is deterministic for identical inputs.
void emit_report(const ConvergenceReport& rep, const ProblemSpec& spec,
                 const std::string& out_dir);

} // namespace surge
