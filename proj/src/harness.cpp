#include "surge/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

namespace surge {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Half-width of the window (in xi = x / eps) that carries the initial data:
// widest bump center plus the decay margin.
double layer_window_scale(const ProblemSpec& spec) {
    const DecayCertificate cert = validate_initial_decay(spec);
    double z0 = 0.0;
    for (const auto& prof : spec.initial_modes)
        for (const auto& b : prof.bumps) z0 = std::max(z0, std::abs(b.center));
    const double margin =
        std::isfinite(cert.beta_min) && cert.beta_min > 0.0
            ? 6.0 / std::sqrt(cert.beta_min)
            : 6.0;
    return z0 + margin;
}

// Times at which the reference solution is recorded: a handful of
// relaxation-scale instants j / gap * eps^2 plus a uniform cover of [0, t0].
std::vector<double> sample_times(double gap, double eps, double t0) {
    std::vector<double> ts;
    for (double j : {0.5, 1.0, 2.0, 3.0, 5.0}) {
        const double t = j / gap * eps * eps;
        if (t <= t0) ts.push_back(t);
    }
    for (int k = 1; k <= 16; ++k) ts.push_back(t0 * k / 16.0);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

struct Window {
    double lo = 0.0;
    double hi = 0.0;
};

// The two x-intervals worth scanning at time t: the initial-layer window and
// the moving-pulse window.
std::array<Window, 2> scan_windows(double t, double eps, double slowness,
                                   double xi_scale, double zeta_half) {
    const double a_xi = eps * xi_scale;
    double lo = (t - eps * zeta_half) / slowness;
    double hi = (t + eps * zeta_half) / slowness;
    if (lo > hi) std::swap(lo, hi);
    return {Window{-a_xi, a_xi}, Window{lo, hi}};
}

template <typename F>
void for_each_window_node(const Vector& x, double dx, const Window& w, F&& fn) {
    const long n = x.size();
    const long h = (n - 1) / 2;
    long ilo = h + static_cast<long>(std::ceil(w.lo / dx - 1e-9));
    long ihi = h + static_cast<long>(std::floor(w.hi / dx + 1e-9));
    ilo = std::max(ilo, 2L);
    ihi = std::min(ihi, n - 3);
    for (long i = ilo; i <= ihi; ++i) fn(i);
}

template <typename F>
void parallel_indices(int count, int workers_wanted, F&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    unsigned workers = workers_wanted > 0 ? static_cast<unsigned>(workers_wanted)
                                          : static_cast<unsigned>(count);
    workers = std::min(workers, std::max(1u, hw));
    workers = std::min(workers, static_cast<unsigned>(count));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::future<void>> futures;
    for (unsigned w = 0; w < workers; ++w)
        futures.push_back(std::async(std::launch::async, [&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        }));
    for (auto& f : futures) f.get();
}

std::string csv_join(const std::vector<double>& vals) {
    std::string out;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) out += ';';
        out += format_double(vals[i]);
    }
    return out;
}

const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Log-log convergence plot for the errors.csv written next to this script."""
import csv
import math
import os
import sys

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "errors.csv"), newline="") as fh:
    rows = list(csv.DictReader(fh))
eps = [float(r["eps"]) for r in rows]
err = [float(r["error"]) for r in rows]
dfc = [float(r["defect"]) for r in rows]


def fit(xs, ys):
    n = len(xs)
    sx, sy = sum(xs), sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    return slope, (sy - slope * sx) / n


slope, _ = fit([math.log(e) for e in eps], [math.log(v) for v in err])
print("error slope: %.3f" % slope)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib not available; slope printed above")

fig, ax = plt.subplots(figsize=(5.0, 4.0))
ax.loglog(eps, err, "o-", label="sup error")
if any(d > 0 for d in dfc):
    ax.loglog(eps, dfc, "s--", label="sup defect")
p = round(slope)
ax.loglog(eps, [err[0] * (e / eps[0]) ** p for e in eps], ":",
          label="slope %d reference" % p)
ax.set_xlabel("eps")
ax.set_ylabel("sup norm")
ax.invert_xaxis()
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "errors.png"), dpi=150)
print("wrote errors.png")
)PY";

} // namespace

FitResult fit_slope(const std::vector<double>& eps,
                    const std::vector<double>& values) {
    if (eps.size() != values.size() || eps.size() < 2)
        throw NumericsError("slope fit needs matching samples (at least two)");
    const int n = static_cast<int>(eps.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        if (!(eps[i] > 0.0) || !(values[i] > 0.0))
            throw NumericsError("slope fit needs strictly positive samples");
        xs[i] = std::log(eps[i]);
        ys[i] = std::log(values[i]);
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300)
        throw NumericsError("slope fit needs at least two distinct eps");
    FitResult fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    for (int i = 0; i < n; ++i)
        fit.residual = std::max(
            fit.residual, std::abs(ys[i] - fit.slope * xs[i] - fit.intercept));
    return fit;
}

Vector defect_at(const ProblemSpec& spec, double eps, const FieldFn& field,
                 double x, double t, double hx, double ht) {
    if (t < ht) throw NumericsError("defect probe needs t >= ht");
    const Vector ut = (field(x, t + ht) - field(x, t - ht)) / (2.0 * ht);
    const Vector ux = (field(x + hx, t) - field(x - hx, t)) / (2.0 * hx);
    const Vector uc = field(x, t);
    Vector res = eps * eps * (ut + spec.speeds.cwiseProduct(ux));
    res -= spec.relaxation * uc;
    if (!spec.nonlinearity.is_zero()) res -= eps * eps * spec.nonlinearity.eval(uc);
    return res;
}

double expansion_defect_sup(const Expansion& exp, double eps,
                            const std::vector<double>& times) {
    const int order = exp.order;
    const double ht = 0.02 * std::pow(eps, 2.0 + 0.5 * (order + 1));
    const double hx = 0.02 * std::pow(eps, 1.0 + 0.5 * (order + 1));
    const double xi_scale = layer_window_scale(exp.spec);
    const double zeta_half = exp.phi0.zeta_max();
    const FieldFn field = [&exp, eps](double x, double t) {
        return exp.evaluate(x, t, eps);
    };

    double sup = 0.0;
    for (double t : times) {
        if (t - ht < 0.0) continue;
        if (t + ht > exp.spec.horizon) continue; // centered probe must fit
        for (const Window& w :
             scan_windows(t, eps, exp.slowness, xi_scale, zeta_half)) {
            const Vector xs = linspace(w.lo, w.hi, 41);
            for (long i = 0; i < xs.size(); ++i)
                sup = std::max(sup, defect_at(exp.spec, eps, field, xs[i], t, hx, ht)
                                        .cwiseAbs()
                                        .maxCoeff());
        }
    }
    return sup;
}

ConvergenceReport error_sweep(const ProblemSpec& spec, const SweepOptions& opt) {
    if (opt.order != 0 && opt.order != 1)
        throw ConfigError("order must be 0 or 1");
    const auto& eps = opt.eps_values;
    if (eps.size() < 3)
        throw ConfigError("sweep needs at least three eps values");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw ConfigError("eps values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw ConfigError("eps values must be strictly decreasing");
    }
    if (opt.dx_factor < 0.0)
        throw ConfigError("dx factor must be positive (zero selects the default)");
    const double dx_factor =
        opt.dx_factor > 0.0 ? opt.dx_factor : (opt.order == 0 ? 0.25 : 0.125);
    const double t0 = std::min(spec.horizon, opt.t0_cap);
    if (!(t0 > 0.0)) throw ConfigError("evaluation horizon must be positive");

    const double eps_min = eps.back();
    ExpansionOptions eo;
    eo.order = opt.order;
    eo.dzeta = opt.dzeta > 0.0
                   ? opt.dzeta
                   : std::max(1e-3, std::min(0.01, 0.15 * std::sqrt(std::pow(
                                                        eps_min, opt.order + 1))));
    const Expansion exp = build_expansion(spec, eo);

    ConvergenceReport rep;
    rep.order = opt.order;
    rep.t0 = t0;
    rep.xi_scale = layer_window_scale(spec);
    rep.zeta_half = exp.phi0.zeta_max();
    rep.dzeta = eo.dzeta;
    rep.entries.resize(eps.size());

    parallel_indices(static_cast<int>(eps.size()), opt.threads, [&](int idx) {
        const double e = eps[idx];
        const double dx = dx_factor * e * e;
        const std::vector<double> times = sample_times(exp.sd.gap, e, t0);

        // Three nested solves; the reference is the Richardson extrapolant of
        // the finer pair, which cancels the shared O(dt^2) + O(dx^2) term of
        // the splitting.  The distance to the extrapolant of the coarser pair
        // conservatively bounds the remaining scheme error (no order gain is
        // assumed, the raw distance is used).
        SolveOptions so;
        so.dx = dx;
        so.interp = opt.interp;
        const SolveResult fine = solve_reference(spec, e, times, so);
        so.dx = 2.0 * dx;
        const SolveResult mid = solve_reference(spec, e, times, so);
        so.dx = 4.0 * dx;
        const SolveResult wide = solve_reference(spec, e, times, so);

        const long hf = (fine.x.size() - 1) / 2;
        const long hm = (mid.x.size() - 1) / 2;
        const long hw = (wide.x.size() - 1) / 2;

        auto reference = [&](std::size_t k, long j) -> Vector {
            const long i = hf + 2 * (j - hm);
            return ((4.0 * fine.states[k].row(i) - mid.states[k].row(j)) / 3.0)
                .transpose();
        };

        double err = 0.0, sep = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            for (const Window& w : scan_windows(times[k], e, exp.slowness,
                                                rep.xi_scale, rep.zeta_half)) {
                for_each_window_node(mid.x, mid.dx, w, [&](long j) {
                    const long i = hf + 2 * (j - hm);
                    if (i < 2 || i >= fine.x.size() - 2) return;
                    const Vector model = exp.evaluate(mid.x[j], times[k], e);
                    err = std::max(
                        err, (reference(k, j) - model).cwiseAbs().maxCoeff());
                });
                for_each_window_node(wide.x, wide.dx, w, [&](long q) {
                    const long j = hm + 2 * (q - hw);
                    const long i = hf + 2 * (j - hm);
                    if (j < 2 || j >= mid.x.size() - 2) return;
                    if (i < 2 || i >= fine.x.size() - 2) return;
                    const Vector again =
                        ((4.0 * mid.states[k].row(j) - wide.states[k].row(q)) / 3.0)
                            .transpose();
                    sep = std::max(
                        sep, (reference(k, j) - again).cwiseAbs().maxCoeff());
                });
            }
        }

        SweepEntry& entry = rep.entries[idx];
        entry.eps = e;
        entry.dx = dx;
        entry.error = err;
        entry.separation = sep;
        entry.ratio = err / std::pow(e, opt.order + 1);
        entry.defect = expansion_defect_sup(exp, e, times);
    });

    std::vector<double> errs, defects;
    rep.monotone = true;
    rep.separation_ok = true;
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
        const SweepEntry& en = rep.entries[i];
        errs.push_back(en.error);
        defects.push_back(en.defect);
        rep.c_hat = std::max(rep.c_hat, en.ratio);
        if (i > 0 && !(en.error < rep.entries[i - 1].error)) rep.monotone = false;
        if (!(en.separation <= 0.1 * en.error)) rep.separation_ok = false;
    }
    const FitResult f = fit_slope(std::vector<double>(eps.begin(), eps.end()), errs);
    rep.slope = f.slope;
    rep.intercept = f.intercept;
    rep.fit_residual = f.residual;
    const bool defects_positive =
        std::all_of(defects.begin(), defects.end(), [](double d) { return d > 0; });
    rep.defect_slope = defects_positive
                           ? fit_slope(std::vector<double>(eps.begin(), eps.end()),
                                       defects)
                                 .slope
                           : kNaN;
    return rep;
}

TheoremVerdict theorem_check(const ConvergenceReport& rep, double slack) {
    TheoremVerdict v;
    const double target = rep.order + 1.0 - slack;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const SweepEntry& en : rep.entries) {
        rmin = std::min(rmin, en.ratio);
        rmax = std::max(rmax, en.ratio);
    }
    const double spread = rmin > 0.0 ? rmax / rmin : kNaN;
    const bool slope_ok = rep.slope >= target;
    const bool band_ok = spread <= 10.0;
    v.passed = slope_ok && band_ok && rep.monotone && rep.separation_ok;

    std::ostringstream os;
    os << "slope " << format_double(rep.slope) << (slope_ok ? " >= " : " < ")
       << format_double(target) << "; normalized-error spread "
       << format_double(spread) << (band_ok ? " <= 10" : " > 10")
       << "; errors " << (rep.monotone ? "decrease" : "do not decrease")
       << " monotonically; reference scheme "
       << (rep.separation_ok ? "resolved" : "NOT resolved");
    v.detail = os.str();
    return v;
}

void emit_report(const ConvergenceReport& rep, const ProblemSpec& spec,
                 const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::ofstream csv(fs::path(out_dir) / "errors.csv", std::ios::binary);
        if (!csv) throw ConfigError("cannot write to " + out_dir);
        csv << "eps,error,defect,ratio\n";
        for (const SweepEntry& en : rep.entries)
            csv << format_double(en.eps) << ',' << format_double(en.error) << ','
                << format_double(en.defect) << ',' << format_double(en.ratio)
                << '\n';
    }

    {
        std::vector<double> epss, dxs, seps;
        for (const SweepEntry& en : rep.entries) {
            epss.push_back(en.eps);
            dxs.push_back(en.dx);
            seps.push_back(en.separation);
        }
        const SpectralData sd = eigendecompose(spec.relaxation, spec.weights);
        const double slowness = frame_slowness(sd, spec.speeds);
        const DiffusionInfo diff = effective_diffusion(sd, spec.speeds);

        std::ofstream man(fs::path(out_dir) / "manifest.csv", std::ios::binary);
        if (!man) throw ConfigError("cannot write to " + out_dir);
        man << "key,value\n";
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(
                          fnv1a64(serialize_problem(spec))));
        man << "config_hash," << hash << '\n';
        man << "states," << spec.m << '\n';
        man << "order," << rep.order << '\n';
        man << "slowness," << format_double(slowness) << '\n';
        man << "dispersion," << format_double(diff.g) << '\n';
        man << "diffusion," << format_double(diff.mu) << '\n';
        man << "gap," << format_double(sd.gap) << '\n';
        man << "horizon," << format_double(rep.t0) << '\n';
        man << "eps," << csv_join(epss) << '\n';
        man << "dx," << csv_join(dxs) << '\n';
        man << "separation," << csv_join(seps) << '\n';
        man << "dzeta," << format_double(rep.dzeta) << '\n';
        man << "zeta_half," << format_double(rep.zeta_half) << '\n';
        man << "xi_scale," << format_double(rep.xi_scale) << '\n';
        man << "slope," << format_double(rep.slope) << '\n';
        man << "intercept," << format_double(rep.intercept) << '\n';
        man << "fit_residual," << format_double(rep.fit_residual) << '\n';
        man << "defect_slope," << format_double(rep.defect_slope) << '\n';
        man << "c_hat," << format_double(rep.c_hat) << '\n';
        man << "separation_ok," << (rep.separation_ok ? "true" : "false") << '\n';
        man << "monotone," << (rep.monotone ? "true" : "false") << '\n';
    }

    std::ofstream py(fs::path(out_dir) / "plot_errors.py", std::ios::binary);
    if (!py) throw ConfigError("cannot write to " + out_dir);
    py << kPlotScript;
}

} // namespace surge
