#include "surge/refsolver.hpp"

#include <algorithm>
#include <cmath>

namespace surge {

namespace {

double exprel_real(double z) {
    if (std::abs(z) < 1e-6) return 1.0 + z / 2.0 + z * z / 6.0;
    return std::expm1(z) / z;
}

} // namespace

ReferenceStepper::ReferenceStepper(Vector x, const Matrix& relaxation,
                                   const Vector& speeds, const Nonlinearity& reaction,
                                   StepperOptions opt)
    : x_(std::move(x)),
      relaxation_(relaxation),
      speeds_(speeds),
      reaction_(reaction),
      opt_(opt) {
    if (x_.size() < 8) throw NumericsError("stepper grid needs at least 8 nodes");
    dx_ = x_[1] - x_[0];
    if (!(dx_ > 0.0)) throw NumericsError("stepper grid spacing must be positive");
    if (!(opt_.eps > 0.0)) throw NumericsError("eps must be positive");
    if (!(opt_.cfl > 0.0)) throw NumericsError("cfl must be positive");
    if (relaxation_.rows() != speeds_.size())
        throw NumericsError("stepper: operator/speed dimension mismatch");
    sd_ = eigendecompose(relaxation_, Vector::Ones(speeds_.size()));
    const double dmax = speeds_.array().abs().maxCoeff();
    dt_nominal_ = dmax > 0.0 ? opt_.cfl * dx_ / dmax : opt_.cfl * dx_;
    scratch_.resize(x_.size());
    shift_base_.resize(speeds_.size());
    shift_w_.resize(speeds_.size());
}

void ReferenceStepper::prepare(double dt) {
    if (dt == dt_current_) return;
    dt_current_ = dt;
    expm_t_ = sd_.relaxation_exponential(dt / (opt_.eps * opt_.eps)).transpose();

    const int m = static_cast<int>(speeds_.size());
    for (int j = 0; j < m; ++j) {
        const double sigma = speeds_[j] * (dt / 2.0) / dx_;
        const double nf = std::floor(sigma);
        shift_base_[j] = static_cast<long>(nf);
        const double t = 1.0 - (sigma - nf); // in (0, 1]
        auto& w = shift_w_[j];
        if (opt_.interp == InterpKind::linear) {
            // nodes b, b+1 sit at slots 1 and 2 of the 4-point stencil
            w = {0.0, 1.0 - t, t, 0.0};
        } else {
            w = {-t * (t - 1.0) * (t - 2.0) / 6.0,
                 (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                 -(t + 1.0) * t * (t - 2.0) / 2.0,
                 (t + 1.0) * t * (t - 1.0) / 6.0};
        }
    }

    const double half = dt / 2.0;
    react_growth_.resize(m);
    react_accum_.resize(m);
    for (int j = 0; j < m; ++j) {
        const double c1 = reaction_.c1[j];
        react_growth_[j] = std::exp(c1 * half);
        react_accum_[j] = half * exprel_real(c1 * half);
    }
}

void ReferenceStepper::advect_half(Matrix& values) {
    const long nx = static_cast<long>(values.rows());
    const int m = static_cast<int>(values.cols());
    for (int j = 0; j < m; ++j) {
        const long n = shift_base_[j];
        const auto& w = shift_w_[j];
        const double* col = values.col(j).data();
        double* out = scratch_.data();
        auto at = [&](long k) { return (k >= 0 && k < nx) ? col[k] : 0.0; };

        // full-stencil interior: b-1 = i-n-2 >= 0 and b+2 = i-n+1 <= nx-1
        const long lo = std::clamp(n + 2, 0L, nx);
        const long hi = std::clamp(nx - 2 + n, -1L, nx - 1);
        for (long i = 0; i < std::min(lo, nx); ++i) {
            const long b = i - n - 1;
            out[i] = w[0] * at(b - 1) + w[1] * at(b) + w[2] * at(b + 1) + w[3] * at(b + 2);
        }
        for (long i = lo; i <= hi; ++i) {
            const long b = i - n - 1;
            out[i] = w[0] * col[b - 1] + w[1] * col[b] + w[2] * col[b + 1] + w[3] * col[b + 2];
        }
        for (long i = std::max(hi + 1, 0L); i < nx; ++i) {
            const long b = i - n - 1;
            out[i] = w[0] * at(b - 1) + w[1] * at(b) + w[2] * at(b + 1) + w[3] * at(b + 2);
        }

        if (opt_.interp == InterpKind::clamped) {
            for (long i = 0; i < nx; ++i) {
                const long b = i - n - 1;
                const double a = at(b);
                const double c = at(b + 1);
                out[i] = std::clamp(out[i], std::min(a, c), std::max(a, c));
            }
        }
        values.col(j) = scratch_;
    }
}

void ReferenceStepper::react_half(Matrix& values) {
    const long nx = static_cast<long>(values.rows());
    const int m = static_cast<int>(values.cols());
    for (int j = 0; j < m; ++j) {
        const double c2 = reaction_.c2[j];
        if (reaction_.c1[j] == 0.0 && c2 == 0.0) continue;
        const double growth = react_growth_[j];
        const double accum = react_accum_[j];
        double* col = values.col(j).data();
        for (long i = 0; i < nx; ++i) {
            const double u = col[i];
            const double denom = 1.0 - c2 * u * accum;
            if (!(denom > 1e-12))
                throw NumericsError("reaction flow reached blow-up (state " +
                                    std::to_string(j) + ")");
            col[i] = u * growth / denom;
        }
    }
}

void ReferenceStepper::step(Matrix& values, double t, double dt) {
    prepare(dt);
    advect_half(values);
    react_half(values);
    values *= expm_t_;
    react_half(values);
    advect_half(values);
    if (source_) {
        const int m = static_cast<int>(values.cols());
        for (int j = 0; j < m; ++j)
            for (long i = 0; i < values.rows(); ++i)
                values(i, j) += dt * source_(x_[i], t, j);
    }
    ++steps_;
}

void ReferenceStepper::advance(Matrix& values, double t_from, double t_to) {
    if (values.rows() != x_.size() ||
        values.cols() != static_cast<Eigen::Index>(speeds_.size()))
        throw NumericsError("stepper: field dimensions do not match the grid");
    const double span = t_to - t_from;
    const double slack = 1e-12 * std::max(1.0, std::abs(t_to));
    if (span <= slack) {
        if (span < -slack) throw NumericsError("stepper cannot integrate backwards");
        return;
    }
    const long n_full = static_cast<long>(std::floor(span / dt_nominal_ + 1e-12));
    for (long k = 0; k < n_full; ++k)
        step(values, t_from + k * dt_nominal_, dt_nominal_);
    const double t_done = t_from + n_full * dt_nominal_;
    const double rest = t_to - t_done;
    if (rest > slack) step(values, t_done, rest);
    if (!values.allFinite())
        throw NumericsError("reference solution lost finiteness by t = " +
                            format_double(t_to));
}

SolveResult solve_reference(const ProblemSpec& spec, double eps,
                            std::vector<double> record_times, const SolveOptions& opt) {
    if (!(eps > 0.0)) throw NumericsError("eps must be positive");
    const double dx = opt.dx > 0.0 ? opt.dx : 0.25 * eps * eps;
    const double width = opt.half_width > 0.0 ? opt.half_width : domain_half_width(spec);
    const long half_count = static_cast<long>(std::ceil(width / dx));
    const long nx = 2 * half_count + 1;
    Vector x(nx);
    for (long i = 0; i < nx; ++i) x[i] = static_cast<double>(i - half_count) * dx;

    if (record_times.empty()) record_times.push_back(spec.horizon);
    std::sort(record_times.begin(), record_times.end());
    const double slack = 1e-12 * std::max(1.0, spec.horizon);
    if (record_times.front() < -slack || record_times.back() > spec.horizon + slack)
        throw NumericsError("record times must lie within [0, T]");
    for (double& t : record_times) t = std::clamp(t, 0.0, spec.horizon);

    const SpectralData sd = eigendecompose(spec.relaxation, spec.weights);
    Matrix values = sample_initial(spec, sd, (x / eps).eval()).values;

    ReferenceStepper stepper(x, spec.relaxation, spec.speeds, spec.nonlinearity,
                             {eps, opt.cfl, opt.interp});

    SolveResult res;
    res.x = x;
    res.dx = dx;
    res.dt = stepper.nominal_dt();
    double t = 0.0;
    for (double target : record_times) {
        stepper.advance(values, t, target);
        t = std::max(t, target);
        res.times.push_back(target);
        res.states.push_back(values);
    }
    res.steps = stepper.steps_taken();
    return res;
}

} // namespace surge
