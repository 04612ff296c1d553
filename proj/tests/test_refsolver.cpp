#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "surge/refsolver.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace surge;

namespace {

const std::string kUniformSpeedText = R"([operator]
m = 2
row0 = -1, 1
row1 = 1, -1
weights = 1, 1

[speeds]
d = 1, 1

[initial]
mode0 = 1, 1, 0
mode1 = 0.5, 2, 0

[run]
T = 0.2
)";

const std::string kCanonicalText = R"([operator]
m = 2
row0 = -1, 1
row1 = 1, -1
weights = 1, 1

[speeds]
d = 2, 1

[nonlinearity]
c2 = -1, -1

[initial]
mode0 = 1, 1, 0

[run]
T = 0.5
)";

Matrix canonical_relaxation() {
    Matrix L(2, 2);
    L << -1.0, 1.0, 1.0, -1.0;
    return L;
}

Nonlinearity zero_reaction(int m) {
    Nonlinearity f;
    f.c1 = Vector::Zero(m);
    f.c2 = Vector::Zero(m);
    return f;
}

// Exact flow of u' = c1 u + c2 u^2 over a time h.
double quadratic_flow(double u0, double c1, double c2, double h) {
    const double growth = std::exp(c1 * h);
    const double z = c1 * h;
    const double exprel = std::abs(z) > 1e-8 ? std::expm1(z) / z : 1.0 + z / 2.0;
    return u0 * growth / (1.0 - c2 * u0 * h * exprel);
}

double sup_diff_on_common_nodes(const SolveResult& coarse, const SolveResult& fine) {
    const long hc = (coarse.x.size() - 1) / 2;
    const long hf = (fine.x.size() - 1) / 2;
    double worst = 0.0;
    for (long j = 0; j < coarse.x.size(); ++j) {
        const long i = hf + 2 * (j - hc);
        REQUIRE(i >= 0);
        REQUIRE(i < fine.x.size());
        const double d = (coarse.states.back().row(j) - fine.states.back().row(i))
                             .cwiseAbs()
                             .maxCoeff();
        worst = std::max(worst, d);
    }
    return worst;
}

} // namespace

TEST_CASE("uniform speeds transport the relaxing profile exactly") {
    // With equal speeds the advection commutes with the relaxation, so the
    // solution is exp(L t / eps^2) w((x - c t) / eps) and the only scheme
    // error is the interpolation of the shifted profile.
    const ProblemSpec spec = load_problem(kUniformSpeedText);
    const SpectralData sd = eigendecompose(spec.relaxation, spec.weights);
    const double eps = 0.5;

    SolveOptions opt;
    opt.dx = 0.005;
    const SolveResult sol = solve_reference(spec, eps, {0.1, 0.2}, opt);
    REQUIRE(sol.times.size() == 2);

    const Vector h0 = sd.real_mode(0);
    const Vector h1 = sd.real_mode(1);
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const double t = sol.times[k];
        const Matrix relax = sd.relaxation_exponential(t / (eps * eps));
        for (long i = 0; i < sol.x.size(); ++i) {
            const double z = (sol.x[i] - t) / eps;
            const Vector w = std::exp(-z * z) * h0 + 0.5 * std::exp(-2.0 * z * z) * h1;
            const Vector expected = relax * w;
            worst = std::max(worst,
                             (sol.states[k].row(i).transpose() - expected)
                                 .cwiseAbs()
                                 .maxCoeff());
        }
    }
    CHECK(worst < 2e-6);
}

TEST_CASE("constant-in-x data follows the relaxation semigroup") {
    // The zero-inflow boundary casts a diffusive interpolation shadow well
    // past the advective distance, so keep the window far from the edges.
    const Matrix L = canonical_relaxation();
    const SpectralData sd = eigendecompose(L, Vector::Ones(2));
    const Vector x = linspace(-8.0, 8.0, 801);
    Vector speeds(2);
    speeds << 2.0, 1.0;
    ReferenceStepper stepper(x, L, speeds, zero_reaction(2), {});

    Vector v(2);
    v << 0.8, -0.3;
    Matrix values = v.transpose().replicate(x.size(), 1);
    stepper.advance(values, 0.0, 0.7);

    const Vector expected = sd.relaxation_exponential(0.7) * v;
    double worst = 0.0;
    for (long i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) > 2.0) continue; // skip the zero-inflow shadow
        worst = std::max(worst,
                         (values.row(i).transpose() - expected).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("quadratic reaction substep reproduces the exact flow") {
    // Zero operator and zero speeds reduce one step to the pure reaction
    // flow: the advection shift picks the node itself and exp(0) = I.
    const Vector x = linspace(-1.0, 1.0, 9);
    Nonlinearity f;
    f.c1 = Vector(2);
    f.c1 << 0.4, 0.0;
    f.c2 = Vector(2);
    f.c2 << -0.8, 0.5;
    ReferenceStepper stepper(x, Matrix::Zero(2, 2), Vector::Zero(2), f, {});

    Vector u0(2);
    u0 << 0.3, -0.2;
    Matrix values = u0.transpose().replicate(x.size(), 1);
    const double h = stepper.nominal_dt();
    stepper.advance(values, 0.0, h);
    REQUIRE(stepper.steps_taken() == 1);

    for (int j = 0; j < 2; ++j) {
        const double expected = quadratic_flow(u0[j], f.c1[j], f.c2[j], h);
        for (long i = 0; i < x.size(); ++i)
            CHECK(values(i, j) == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("reaction flow blow-up raises a numerics error") {
    const Vector x = linspace(-1.0, 1.0, 9);
    Nonlinearity f;
    f.c1 = Vector::Zero(2);
    f.c2 = Vector(2);
    f.c2 << 1.0, 0.0;
    ReferenceStepper stepper(x, Matrix::Zero(2, 2), Vector::Zero(2), f, {});

    Matrix values = Matrix::Constant(x.size(), 2, 100.0);
    CHECK_THROWS_WITH_AS(stepper.advance(values, 0.0, 1.0),
                         "reaction flow reached blow-up (state 0)", NumericsError);
}

TEST_CASE("nested grids show second-order self-convergence") {
    const ProblemSpec spec = load_problem(kCanonicalText);
    const double eps = 0.4;
    std::vector<SolveResult> runs;
    for (double dx : {0.04, 0.02, 0.01}) {
        SolveOptions opt;
        opt.dx = dx;
        runs.push_back(solve_reference(spec, eps, {0.1}, opt));
    }
    const double e1 = sup_diff_on_common_nodes(runs[0], runs[1]);
    const double e2 = sup_diff_on_common_nodes(runs[1], runs[2]);
    REQUIRE(e2 > 0.0);
    const double rate = std::log2(e1 / e2);
    CHECK(rate > 1.6);
    CHECK(e2 < e1);
}

TEST_CASE("weighted zero-mode mass is conserved without reaction") {
    ProblemSpec spec = load_problem(kCanonicalText);
    spec.nonlinearity.c1 = Vector::Zero(2);
    spec.nonlinearity.c2 = Vector::Zero(2);
    const SpectralData sd = eigendecompose(spec.relaxation, spec.weights);
    const Vector h0s = sd.real_left_mode(0);

    const double eps = 0.4;
    SolveOptions opt;
    opt.dx = 0.02;
    const SolveResult sol = solve_reference(spec, eps, {0.0, 0.2}, opt);
    REQUIRE(sol.states.size() == 2);

    auto mass = [&](const Matrix& state) {
        double total = 0.0;
        for (long i = 0; i < state.rows(); ++i)
            total += sd.wdot(Vector(state.row(i).transpose()), h0s);
        return total * sol.dx;
    };
    const double m0 = mass(sol.states[0]);
    const double m1 = mass(sol.states[1]);
    REQUIRE(std::abs(m0) > 0.1);
    CHECK(std::abs(m1 - m0) / std::abs(m0) < 1e-8);
}

TEST_CASE("monotone interpolation variants keep nonnegative data nonnegative") {
    const Matrix L = canonical_relaxation();
    const Vector x = linspace(-4.0, 4.0, 401);
    Vector speeds(2);
    speeds << 2.0, 1.0;
    for (InterpKind kind : {InterpKind::linear, InterpKind::clamped}) {
        StepperOptions opt;
        opt.interp = kind;
        ReferenceStepper stepper(x, L, speeds, zero_reaction(2), opt);
        Matrix values(x.size(), 2);
        for (long i = 0; i < x.size(); ++i) {
            const double g = std::exp(-x[i] * x[i]);
            values(i, 0) = g;
            values(i, 1) = g;
        }
        stepper.advance(values, 0.0, 0.5);
        CHECK(values.minCoeff() >= -1e-13);
    }
}

TEST_CASE("spatially constant equilibria are fixed points") {
    const Matrix L = canonical_relaxation();
    const Vector x = linspace(-8.0, 8.0, 801);
    Vector speeds(2);
    speeds << 2.0, 1.0;
    ReferenceStepper stepper(x, L, speeds, zero_reaction(2), {});

    Matrix values = Matrix::Constant(x.size(), 2, 0.7); // multiple of the zero mode
    stepper.advance(values, 0.0, 0.5);
    double worst = 0.0;
    for (long i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) > 2.0) continue;
        worst = std::max(worst, (values.row(i).array() - 0.7).abs().maxCoeff());
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("solver guards its inputs") {
    const ProblemSpec spec = load_problem(kCanonicalText);
    SUBCASE("record times outside the horizon") {
        CHECK_THROWS_AS(solve_reference(spec, 0.4, {0.9}), NumericsError);
        CHECK_THROWS_AS(solve_reference(spec, 0.4, {-0.1}), NumericsError);
    }
    SUBCASE("record times are sorted for the caller") {
        SolveOptions opt;
        opt.dx = 0.04;
        const SolveResult sol = solve_reference(spec, 0.4, {0.1, 0.05}, opt);
        REQUIRE(sol.times.size() == 2);
        CHECK(sol.times[0] == 0.05);
        CHECK(sol.times[1] == 0.1);
    }
    SUBCASE("eps must be positive") {
        CHECK_THROWS_AS(solve_reference(spec, 0.0, {0.1}), NumericsError);
    }
    SUBCASE("stepper needs a real grid") {
        CHECK_THROWS_AS(ReferenceStepper(linspace(0.0, 1.0, 4), canonical_relaxation(),
                                         Vector::Ones(2), zero_reaction(2), {}),
                        NumericsError);
    }
}
