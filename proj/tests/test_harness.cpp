#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "surge/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace surge;

namespace {

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

ProblemSpec linear_spec() {
    ProblemSpec spec = load_problem(kCanonicalText);
    spec.nonlinearity.c1 = Vector::Zero(2);
    spec.nonlinearity.c2 = Vector::Zero(2);
    return spec;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("log-log fit recovers exact power laws") {
    const std::vector<double> eps = {0.2, 0.1, 0.05};

    SUBCASE("linear data") {
        const FitResult fit = fit_slope(eps, eps);
        CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fit.intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        CHECK(fit.residual < 1e-12);
    }
    SUBCASE("quadratic data with a prefactor") {
        std::vector<double> values;
        for (double e : eps) values.push_back(3.0 * e * e);
        const FitResult fit = fit_slope(eps, values);
        CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
    }
    SUBCASE("guards") {
        CHECK_THROWS_AS(fit_slope({0.1}, {0.1}), NumericsError);
        CHECK_THROWS_AS(fit_slope({0.2, 0.1}, {1.0, -1.0}), NumericsError);
        CHECK_THROWS_AS(fit_slope({0.1, 0.1}, {1.0, 1.0}), NumericsError);
        CHECK_THROWS_AS(fit_slope({0.2, 0.1}, {1.0}), NumericsError);
    }
}

TEST_CASE("pointwise defect vanishes on exact steady states") {
    const ProblemSpec spec = linear_spec();
    const double eps = 0.3;
    const double hx = 1e-3;
    const double ht = 1e-3;

    SUBCASE("zero field") {
        const FieldFn zero = [](double, double) { return Vector::Zero(2); };
        CHECK(defect_at(spec, eps, zero, 0.1, 0.05, hx, ht).cwiseAbs().maxCoeff() ==
              0.0);
    }
    SUBCASE("constant zero-mode multiples solve the system") {
        const FieldFn flat = [](double, double) {
            return (0.4 * Vector::Ones(2)).eval();
        };
        CHECK(defect_at(spec, eps, flat, -0.2, 0.1, hx, ht).cwiseAbs().maxCoeff() <
              1e-15);
    }
    SUBCASE("constant fast-mode data leaves the relaxation residual") {
        Vector h1(2);
        h1 << 1.0, -1.0;
        const FieldFn fast = [h1](double, double) { return h1; };
        const Vector d = defect_at(spec, eps, fast, 0.0, 0.1, hx, ht);
        CHECK(d[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(d[1] == doctest::Approx(-2.0).epsilon(1e-12));
    }
    SUBCASE("time probe must fit above zero") {
        const FieldFn zero = [](double, double) { return Vector::Zero(2); };
        CHECK_THROWS_AS(defect_at(spec, eps, zero, 0.0, 5e-4, hx, ht), NumericsError);
    }
}

TEST_CASE("leading-order truncation carries a first-order defect") {
    const ProblemSpec spec = load_problem(kCanonicalText);
    const Expansion exp = build_expansion(spec, {});
    const double value = expansion_defect_sup(exp, 0.1, {0.02, 0.1});
    CHECK(value > 1e-3);
    CHECK(value < 1.0);
}

TEST_CASE("mini convergence sweep certifies the remainder estimate") {
    const ProblemSpec spec = load_problem(kCanonicalText);
    SweepOptions opt;
    opt.order = 0;
    opt.eps_values = {0.2, 0.1, 0.05};

    const ConvergenceReport rep = error_sweep(spec, opt);
    REQUIRE(rep.entries.size() == 3);
    for (const SweepEntry& e : rep.entries) {
        CHECK(e.error > 0.0);
        CHECK(e.separation < e.error);
        CHECK(e.ratio == doctest::Approx(e.error / e.eps));
    }
    CHECK(rep.monotone);
    CHECK(rep.separation_ok);
    CHECK(rep.slope > 0.85);
    CHECK(rep.slope < 1.4);
    CHECK(rep.c_hat > 0.0);
    // the residual of the truncated hierarchy decays one order below the
    // remainder: first order here, since the next corrector absorbs it
    CHECK(rep.defect_slope > 0.8);
    CHECK(rep.defect_slope < 1.35);

    const TheoremVerdict verdict = theorem_check(rep, opt.slack);
    CHECK(verdict.passed);

    SUBCASE("reports serialize deterministically") {
        emit_report(rep, spec, "harness_out_a");
        emit_report(rep, spec, "harness_out_b");
        const std::string errors_a = slurp("harness_out_a/errors.csv");
        CHECK(errors_a == slurp("harness_out_b/errors.csv"));
        CHECK(slurp("harness_out_a/manifest.csv") ==
              slurp("harness_out_b/manifest.csv"));
        CHECK(errors_a.rfind("eps,error,defect,ratio\n", 0) == 0);

        const std::string manifest = slurp("harness_out_a/manifest.csv");
        CHECK(manifest.find("config_hash,") != std::string::npos);
        CHECK(manifest.find("slope,") != std::string::npos);
        CHECK(manifest.find("separation_ok,true") != std::string::npos);
        CHECK(slurp("harness_out_a/plot_errors.py").find("errors.csv") !=
              std::string::npos);
    }
}

TEST_CASE("remainder verdict fails with a named reason") {
    ConvergenceReport rep;
    rep.order = 0;
    rep.slope = 0.2;
    rep.monotone = true;
    rep.separation_ok = true;
    rep.entries.resize(3);
    rep.entries[0].ratio = 1.0;
    rep.entries[1].ratio = 1.1;
    rep.entries[2].ratio = 1.2;
    const TheoremVerdict verdict = theorem_check(rep, 0.3);
    CHECK_FALSE(verdict.passed);
    CHECK(verdict.detail.find("slope") != std::string::npos);
}

TEST_CASE("sweep options are validated") {
    const ProblemSpec spec = load_problem(kCanonicalText);
    SweepOptions opt;
    opt.eps_values = {0.2, 0.1, 0.05};

    SUBCASE("order") {
        opt.order = 5;
        CHECK_THROWS_AS(error_sweep(spec, opt), ConfigError);
    }
    SUBCASE("too few eps values") {
        opt.eps_values = {0.2, 0.1};
        CHECK_THROWS_AS(error_sweep(spec, opt), ConfigError);
    }
    SUBCASE("eps values must decrease") {
        opt.eps_values = {0.05, 0.1, 0.2};
        CHECK_THROWS_AS(error_sweep(spec, opt), ConfigError);
    }
    SUBCASE("grid factor must not be negative") {
        opt.dx_factor = -1.0;
        CHECK_THROWS_AS(error_sweep(spec, opt), ConfigError);
    }
}
