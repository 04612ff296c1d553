#include "surge/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace surge {

namespace {

Complex exprel(Complex z) {
    if (std::abs(z) < 1e-6) return 1.0 + z / 2.0 + z * z / 6.0;
    return (std::exp(z) - 1.0) / z;
}

// int_0^tau exp(li (tau - s)) exp(lj s) ds, stable for widely separated decay
// rates (each exponential may underflow independently).
Complex convolved_exponential(Complex li, Complex lj, double tau) {
    const Complex z = (lj - li) * tau;
    if (std::abs(z) < 1e-6) return tau * std::exp(li * tau) * exprel(z);
    return (std::exp(lj * tau) - std::exp(li * tau)) / (lj - li);
}

double real_or_throw(Complex z, const char* what) {
    if (std::abs(z.imag()) > 1e-12 * std::max(1.0, std::abs(z)))
        throw NumericsError(std::string(what) + " is not real");
    return z.real();
}

// centered stencils with zero beyond the edges (profiles carry certified
// Gaussian tails there)
void second_derivative(const Vector& p, double dz, Vector& out) {
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i) {
        const double pm = i > 0 ? p[i - 1] : 0.0;
        const double pp = i < n - 1 ? p[i + 1] : 0.0;
        out[i] = (pm - 2.0 * p[i] + pp) / (dz * dz);
    }
}

void first_derivative(const Vector& p, double dz, Vector& out) {
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i) {
        const double pm = i > 0 ? p[i - 1] : 0.0;
        const double pp = i < n - 1 ? p[i + 1] : 0.0;
        out[i] = (pp - pm) / (2.0 * dz);
    }
}

void first_derivative_o4(const Vector& p, double dz, Vector& out) {
    const int n = static_cast<int>(p.size());
    auto at = [&](int i) { return (i >= 0 && i < n) ? p[i] : 0.0; };
    for (int i = 0; i < n; ++i)
        out[i] = (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * dz);
}

void third_derivative(const Vector& p, double dz, Vector& out) {
    const int n = static_cast<int>(p.size());
    auto at = [&](int i) { return (i >= 0 && i < n) ? p[i] : 0.0; };
    for (int i = 0; i < n; ++i)
        out[i] = (at(i + 2) - 2.0 * at(i + 1) + 2.0 * at(i - 1) - at(i - 2)) /
                 (2.0 * dz * dz * dz);
}

double edge_tail(const Matrix& values) {
    const int nz = static_cast<int>(values.rows());
    if (nz < 4) return values.cwiseAbs().maxCoeff();
    double t = 0.0;
    for (int r : {0, 1, nz - 2, nz - 1})
        t = std::max(t, values.row(r).cwiseAbs().maxCoeff());
    return t;
}

} // namespace

// ---------------------------------------------------------------------------
// AmplitudeProfile

namespace {

double sample_profile(const AmplitudeProfile& p, const Matrix& table, double zeta,
                      double t) {
    const int nz = static_cast<int>(table.rows());
    const int nt = static_cast<int>(table.cols());
    const double t_end = p.t0 + (nt - 1) * p.dt;
    const double t_slack = 1e-9 * (1.0 + std::abs(t_end));
    if (t < p.t0 - t_slack || t > t_end + t_slack)
        throw GridError("amplitude query at t = " + format_double(t) +
                        " outside stored range [" + format_double(p.t0) + ", " +
                        format_double(t_end) + "]");
    t = std::clamp(t, p.t0, t_end);

    if (zeta < p.zeta0 || zeta > p.zeta0 + (nz - 1) * p.dzeta) {
        if (p.tail <= tol::profile_tail) return 0.0;
        throw GridError("amplitude grid too small: query needs |zeta| >= " +
                        format_double(std::abs(zeta)) + " but the grid covers [" +
                        format_double(p.zeta0) + ", " +
                        format_double(p.zeta0 + (nz - 1) * p.dzeta) +
                        "] with edge tail " + format_double(p.tail));
    }

    if (nt == 1) return cubic_interp(table.col(0).data(), nz, p.zeta0, p.dzeta, zeta);

    const int jc = static_cast<int>(std::floor((t - p.t0) / p.dt));
    const int j0 = std::clamp(jc - 1, 0, std::max(0, nt - 4));
    const int span = std::min(4, nt - j0);
    double vals[4];
    for (int k = 0; k < span; ++k)
        vals[k] = cubic_interp(table.col(j0 + k).data(), nz, p.zeta0, p.dzeta, zeta);
    return cubic_interp(vals, span, p.t0 + j0 * p.dt, p.dt, t);
}

} // namespace

double AmplitudeProfile::eval(double zeta, double t) const {
    if (empty()) return 0.0;
    return sample_profile(*this, values, zeta, t);
}

double AmplitudeProfile::eval_slope(double zeta, double t) const {
    if (empty()) return 0.0;
    return sample_profile(*this, slopes, zeta, t);
}

// ---------------------------------------------------------------------------
// construction

double amplitude_half_width(const ProblemSpec& spec, double slowness, double mu) {
    double zmax = 0.0;
    double beta_min = std::numeric_limits<double>::infinity();
    for (const auto& prof : spec.initial_modes)
        for (const auto& b : prof.bumps) {
            zmax = std::max(zmax, std::abs(b.center));
            beta_min = std::min(beta_min, b.beta);
        }
    const double decay_margin = std::isfinite(beta_min) ? 8.0 / std::sqrt(beta_min) : 0.0;
    return std::abs(slowness) * (zmax + decay_margin) +
           8.0 * std::sqrt(std::max(0.0, mu) * spec.horizon) + 1.0;
}

Expansion build_expansion(const ProblemSpec& spec, const ExpansionOptions& opt) {
    if (opt.order < 0 || opt.order > 1)
        throw NumericsError("expansion order must be 0 or 1");
    if (!(opt.dzeta > 0.0)) throw NumericsError("amplitude grid spacing must be positive");

    Expansion ex;
    ex.order = opt.order;
    ex.spec = spec;
    ex.sd = eigendecompose(spec.relaxation, spec.weights);

    const ConditionReport rep = check_conditions(spec);
    for (const char* id : {"spectral-gap", "mode-pairing", "negative-dispersion",
                           "positive-weights", "distinct-eigenvalues", "initial-decay"}) {
        const auto& c = rep.find(id);
        if (!c.passed)
            throw NumericsError(std::string("problem not admissible (") + id + "): " +
                                c.detail);
    }

    const SpectralData& sd = ex.sd;
    const int m = sd.size();
    const Vector& h0 = sd.h0;
    const Vector& h0s = sd.h0_star;
    const Vector& D = spec.speeds;
    const Vector& c1 = spec.nonlinearity.c1;
    const Vector& c2 = spec.nonlinearity.c2;

    ex.slowness = frame_slowness(sd, D);
    ex.diffusion = effective_diffusion(sd, D);
    const double B = ex.slowness;
    const double mu = ex.diffusion.mu;
    const Vector& v1 = ex.diffusion.v1;

    ex.fbar_lin = sd.wdot((c1.array() * h0.array()).matrix(), h0s);
    ex.fbar_quad = sd.wdot((c2.array() * h0.array() * h0.array()).matrix(), h0s);

    const Vector psi = speed_fluctuation(sd, D);
    {
        const Vector avec = (B * B * (psi.array() * v1.array()) + mu * h0.array()).matrix();
        const Vector bvec = (ex.fbar_lin * h0.array() - c1.array() * h0.array()).matrix();
        const Vector cvec =
            (ex.fbar_quad * h0.array() - c2.array() * h0.array() * h0.array()).matrix();
        auto project = [&](const Vector& f) {
            const Vector gf = sd.apply_pseudo_inverse(f);
            return sd.wdot((psi.array() * gf.array()).matrix(), h0s);
        };
        const double a1 = project(avec);
        const double a2 = project(bvec);
        const double a3 = project(cvec);
        const double b1 = sd.wdot((c1.array() * v1.array()).matrix(), h0s);
        const double b2 = sd.wdot((c2.array() * h0.array() * v1.array()).matrix(), h0s);
        ex.src_third = B * a1;
        ex.src_first = B * (a2 - b1);
        ex.src_mixed = 2.0 * B * (a3 - b2);
    }

    ex.pair_speed_.resize(m, m);
    ex.pair_v1_.resize(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j)
            ex.pair_speed_(i, j) = sd.wdot(
                ComplexVector(D.cast<Complex>().array() * sd.right_modes.col(j).array()),
                ComplexVector(sd.left_modes.col(i)));
        ex.pair_v1_[i] = sd.wdot(ComplexVector(v1.cast<Complex>()),
                                 ComplexVector(sd.left_modes.col(i)));
    }

    for (int j = 1; j < m; ++j)
        if (!spec.initial_modes[j].is_zero()) ex.sources_.push_back(j);
    ex.source_modes_.resize(m, static_cast<int>(ex.sources_.size()));
    ex.source_rates_.resize(static_cast<int>(ex.sources_.size()));
    for (size_t k = 0; k < ex.sources_.size(); ++k) {
        const int j = ex.sources_[k];
        ex.source_modes_.col(static_cast<int>(k)) = sd.real_mode(j);
        ex.source_rates_[static_cast<int>(k)] =
            real_or_throw(sd.eigenvalues[j], "decay rate of an initialized mode");
    }

    // amplitude grid
    const double half =
        opt.zeta_half > 0.0 ? opt.zeta_half : amplitude_half_width(spec, B, mu);
    const double dz = opt.dzeta;
    const int halfn = static_cast<int>(std::ceil(half / dz));
    const int nz = 2 * halfn + 1;
    const double zeta0 = -halfn * dz;
    const int nt = std::max(2, opt.snapshots);
    const double dt_snap = spec.horizon / (nt - 1);

    Vector p0(nz);
    for (int i = 0; i < nz; ++i)
        p0[i] = spec.initial_modes[0].eval(-(zeta0 + i * dz) / B);

    Vector p1 = Vector::Zero(nz);
    if (ex.order >= 1) {
        for (size_t k = 0; k < ex.sources_.size(); ++k) {
            const int j = ex.sources_[k];
            const double coef =
                real_or_throw(ex.pair_speed_(0, j), "layer-mode pairing") /
                ex.source_rates_[static_cast<int>(k)];
            for (int i = 0; i < nz; ++i)
                p1[i] += coef * spec.initial_modes[j].deriv(-(zeta0 + i * dz) / B);
        }
    }

    // explicit two-stage stepping of d(phi)/dt = mu phi'' + reaction + source
    const double amp0 = validate_initial_decay(spec).envelope;
    const double react = std::abs(ex.fbar_lin) + 4.0 * std::abs(ex.fbar_quad) * amp0;
    const double dt_stab = std::min(0.4 * dz * dz / mu, 0.2 / (1.0 + react));
    const int sub = std::max(1, static_cast<int>(std::ceil(dt_snap / dt_stab)));
    const double h = dt_snap / sub;

    ex.phi0.zeta0 = zeta0;
    ex.phi0.dzeta = dz;
    ex.phi0.t0 = 0.0;
    ex.phi0.dt = dt_snap;
    ex.phi0.values.resize(nz, nt);
    ex.phi0.slopes.resize(nz, nt);
    if (ex.order >= 1) {
        ex.phi1 = ex.phi0;
        ex.phi1.values.resize(nz, nt);
        ex.phi1.slopes.resize(nz, nt);
    }

    Vector lap(nz), d1(nz), d3(nz), k1a(nz), k1b(nz), k2a(nz), k2b(nz), tmp0(nz), tmp1(nz);
    auto rhs0 = [&](const Vector& a, Vector& out) {
        second_derivative(a, dz, lap);
        out = mu * lap +
              (ex.fbar_lin * a.array() + ex.fbar_quad * a.array().square()).matrix();
    };
    auto rhs1 = [&](const Vector& a, const Vector& b, Vector& out) {
        second_derivative(b, dz, lap);
        out = mu * lap + ((ex.fbar_lin + 2.0 * ex.fbar_quad * a.array()) * b.array()).matrix();
        third_derivative(a, dz, d3);
        first_derivative(a, dz, d1);
        out += (ex.src_third * d3.array() + ex.src_first * d1.array() +
                ex.src_mixed * a.array() * d1.array())
                   .matrix();
    };
    auto record = [&](int snap) {
        ex.phi0.values.col(snap) = p0;
        first_derivative_o4(p0, dz, d1);
        ex.phi0.slopes.col(snap) = d1;
        if (ex.order >= 1) {
            ex.phi1.values.col(snap) = p1;
            first_derivative_o4(p1, dz, d1);
            ex.phi1.slopes.col(snap) = d1;
        }
    };

    record(0);
    for (int snap = 1; snap < nt; ++snap) {
        for (int s = 0; s < sub; ++s) {
            rhs0(p0, k1a);
            if (ex.order >= 1) rhs1(p0, p1, k1b);
            tmp0 = p0 + h * k1a;
            if (ex.order >= 1) tmp1 = p1 + h * k1b;
            rhs0(tmp0, k2a);
            if (ex.order >= 1) rhs1(tmp0, tmp1, k2b);
            p0 += 0.5 * h * (k1a + k2a);
            if (ex.order >= 1) p1 += 0.5 * h * (k1b + k2b);
        }
        if (!p0.allFinite() || (ex.order >= 1 && !p1.allFinite()))
            throw NumericsError("amplitude evolution diverged at t = " +
                                format_double(snap * dt_snap));
        record(snap);
    }

    ex.phi0.tail = std::max(edge_tail(ex.phi0.values), edge_tail(ex.phi0.slopes));
    if (ex.order >= 1)
        ex.phi1.tail = std::max(edge_tail(ex.phi1.values), edge_tail(ex.phi1.slopes));
    return ex;
}

// ---------------------------------------------------------------------------
// evaluation

Vector Expansion::surge0(double zeta, double t) const {
    return phi0.eval(zeta, t) * sd.h0;
}

Vector Expansion::surge1(double zeta, double t) const {
    if (order < 1) throw NumericsError("first-order term was not built");
    return -slowness * phi0.eval_slope(zeta, t) * diffusion.v1 +
           phi1.eval(zeta, t) * sd.h0;
}

Vector Expansion::layer0(double xi, double tau) const {
    Vector out = Vector::Zero(sd.size());
    for (size_t k = 0; k < sources_.size(); ++k) {
        const int j = sources_[k];
        out += spec.initial_modes[j].eval(xi) *
               std::exp(source_rates_[static_cast<int>(k)] * tau) *
               source_modes_.col(static_cast<int>(k));
    }
    return out;
}

Complex Expansion::layer1_coefficient(int i, double xi, double tau) const {
    const Complex li = sd.eigenvalues[i];
    Complex a0 = -spec.initial_modes[0].deriv(xi) * pair_v1_[i];
    if (i == 0) {
        double slow_shift = 0.0;
        for (size_t k = 0; k < sources_.size(); ++k) {
            const int j = sources_[k];
            slow_shift += real_or_throw(pair_speed_(0, j), "layer-mode pairing") /
                          source_rates_[static_cast<int>(k)] *
                          spec.initial_modes[j].deriv(xi);
        }
        a0 -= slow_shift;
    }
    Complex a = std::exp(li * tau) * a0;
    for (size_t k = 0; k < sources_.size(); ++k) {
        const int j = sources_[k];
        a -= pair_speed_(i, j) * spec.initial_modes[j].deriv(xi) *
             convolved_exponential(li, Complex(source_rates_[static_cast<int>(k)], 0.0),
                                   tau);
    }
    return a;
}

Vector Expansion::layer1(double xi, double tau) const {
    ComplexVector acc = ComplexVector::Zero(sd.size());
    for (int i = 0; i < sd.size(); ++i)
        acc += layer1_coefficient(i, xi, tau) * sd.right_modes.col(i);
    return acc.real();
}

Vector Expansion::evaluate(double x, double t, double eps) const {
    if (!(eps > 0.0)) throw NumericsError("eps must be positive");
    const double zeta = (t - slowness * x) / eps;
    const double xi = x / eps;
    const double tau = t / (eps * eps);
    Vector u = surge0(zeta, t) + layer0(xi, tau);
    if (order >= 1) u += eps * (surge1(zeta, t) + layer1(xi, tau));
    return u;
}

} // namespace surge
