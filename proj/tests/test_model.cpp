#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "surge/model.hpp"
#include "surge/spectral.hpp"

#include <cmath>
#include <string>

using namespace surge;

namespace {

const std::string kCanonicalText = R"(# two-state exchange fixture
[operator]
m = 2
row0 = -1, 1
row1 = 1, -1
weights = 1, 1

[speeds]
d = 2, 1   # fast, slow

[nonlinearity]
c2 = -1, -1

[initial]
mode0 = 1, 1, 0

[run]
T = 0.5
)";

} // namespace

TEST_CASE("document loads into a validated problem") {
    const ProblemSpec spec = load_problem(kCanonicalText);
    CHECK(spec.m == 2);
    CHECK(spec.speeds(0) == 2.0);
    CHECK(spec.speeds(1) == 1.0);
    CHECK(spec.relaxation(0, 0) == -1.0);
    CHECK(spec.relaxation(0, 1) == 1.0);
    CHECK(spec.weights(0) == 1.0);
    CHECK(spec.nonlinearity.c1.isZero(0.0));
    CHECK(spec.nonlinearity.c2(0) == -1.0);
    CHECK(spec.horizon == 0.5);
    REQUIRE(spec.initial_modes.size() == 2);
    REQUIRE(spec.initial_modes[0].bumps.size() == 1);
    CHECK(spec.initial_modes[0].bumps[0].amplitude == 1.0);
    CHECK(spec.initial_modes[0].bumps[0].beta == 1.0);
    CHECK(spec.initial_modes[1].is_zero());
    CHECK(spec.speed_floor() == 1.0);
    CHECK(spec.dot(Vector::Ones(2), spec.speeds) == 3.0);
}

TEST_CASE("shipped fixture files load") {
    for (const char* name :
         {"canonical.cfg", "canonical_twomode.cfg", "asym.cfg",
          "degenerate_speed.cfg", "negative_offdiag.cfg"}) {
        CAPTURE(name);
        const ProblemSpec spec =
            load_problem_file(std::string(SURGE_CONFIG_DIR "/") + name);
        CHECK(spec.m >= 2);
        CHECK(spec.horizon > 0.0);
    }
    CHECK_THROWS_AS(load_problem_file(SURGE_CONFIG_DIR "/does_not_exist.cfg"),
                    ConfigError);
}

TEST_CASE("semicolons separate bumps, full-line semicolon is a comment") {
    std::string text = kCanonicalText;
    text.replace(text.find("mode0 = 1, 1, 0"), 15,
                 "mode0 = 1, 1, 0 ; 0.5, 2, 1.5");
    text += "; trailing remark line\n";
    const ProblemSpec spec = load_problem(text);
    REQUIRE(spec.initial_modes[0].bumps.size() == 2);
    CHECK(spec.initial_modes[0].bumps[1].amplitude == 0.5);
    CHECK(spec.initial_modes[0].bumps[1].beta == 2.0);
    CHECK(spec.initial_modes[0].bumps[1].center == 1.5);
}

TEST_CASE("parser reports offending line numbers") {
    SUBCASE("duplicate key") {
        const std::string text = "[run]\nT = 1\nT = 2\n";
        CHECK_THROWS_WITH_AS(load_problem(text),
                             doctest::Contains("line 3"), ConfigError);
    }
    SUBCASE("unterminated section header") {
        CHECK_THROWS_WITH_AS(load_problem("[operator\nm = 2\n"),
                             doctest::Contains("line 1"), ConfigError);
    }
    SUBCASE("key outside any section") {
        CHECK_THROWS_WITH_AS(load_problem("m = 2\n"),
                             doctest::Contains("outside"), ConfigError);
    }
    SUBCASE("missing horizon") {
        std::string text = kCanonicalText;
        text.erase(text.find("[run]"));
        CHECK_THROWS_WITH_AS(load_problem(text),
                             doctest::Contains("missing required field 'T'"),
                             ConfigError);
    }
    SUBCASE("malformed number") {
        std::string text = kCanonicalText;
        text.replace(text.find("T = 0.5"), 7, "T = 0.5x");
        CHECK_THROWS_AS(load_problem(text), ConfigError);
    }
}

TEST_CASE("validation rejects broken problems") {
    SUBCASE("zero speed") {
        std::string text = kCanonicalText;
        text.replace(text.find("d = 2, 1"), 8, "d = 2, 0");
        CHECK_THROWS_WITH_AS(load_problem(text),
                             doctest::Contains("speed lower bound"), ConfigError);
    }
    SUBCASE("nonpositive weight") {
        std::string text = kCanonicalText;
        text.replace(text.find("weights = 1, 1"), 14, "weights = 1, 0");
        CHECK_THROWS_WITH_AS(load_problem(text),
                             doctest::Contains("weights"), ConfigError);
    }
    SUBCASE("non-decaying initial bump") {
        std::string text = kCanonicalText;
        text.replace(text.find("mode0 = 1, 1, 0"), 15, "mode0 = 1, -1, 0");
        CHECK_THROWS_WITH_AS(load_problem(text),
                             doctest::Contains("Gaussian-decaying"), ConfigError);
    }
    SUBCASE("state count out of range") {
        std::string text = kCanonicalText;
        text.replace(text.find("m = 2"), 5, "m = 1");
        CHECK_THROWS_AS(load_problem(text), ConfigError);
    }
    SUBCASE("mode index out of range") {
        std::string text = kCanonicalText;
        text.replace(text.find("mode0"), 5, "mode7");
        CHECK_THROWS_WITH_AS(load_problem(text),
                             doctest::Contains("out of range"), ConfigError);
    }
    SUBCASE("wrong row width") {
        std::string text = kCanonicalText;
        text.replace(text.find("row0 = -1, 1"), 12, "row0 = -1, 1, 3");
        CHECK_THROWS_AS(load_problem(text), ConfigError);
    }
}

TEST_CASE("serialization round-trips bitwise") {
    ProblemSpec spec = load_problem(kCanonicalText);
    spec.speeds(0) = 2.0 / 3.0; // force a non-terminating binary fraction
    spec.nonlinearity.c1(1) = 0.1;
    spec.initial_modes[1].bumps.push_back({0.3, 1.0 / 7.0, -0.25});
    const std::string text = serialize_problem(spec);
    const ProblemSpec back = load_problem(text);
    CHECK(back.m == spec.m);
    CHECK((back.speeds - spec.speeds).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.relaxation - spec.relaxation).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.weights - spec.weights).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.nonlinearity.c1 - spec.nonlinearity.c1).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((back.nonlinearity.c2 - spec.nonlinearity.c2).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(back.horizon == spec.horizon);
    REQUIRE(back.initial_modes.size() == spec.initial_modes.size());
    for (std::size_t k = 0; k < back.initial_modes.size(); ++k) {
        REQUIRE(back.initial_modes[k].bumps.size() ==
                spec.initial_modes[k].bumps.size());
        for (std::size_t b = 0; b < back.initial_modes[k].bumps.size(); ++b) {
            CHECK(back.initial_modes[k].bumps[b].amplitude ==
                  spec.initial_modes[k].bumps[b].amplitude);
            CHECK(back.initial_modes[k].bumps[b].beta ==
                  spec.initial_modes[k].bumps[b].beta);
            CHECK(back.initial_modes[k].bumps[b].center ==
                  spec.initial_modes[k].bumps[b].center);
        }
    }
    CHECK(serialize_problem(back) == text);
}

TEST_CASE("decay certificate") {
    ProblemSpec spec = load_problem(kCanonicalText);
    DecayCertificate cert = validate_initial_decay(spec);
    CHECK(cert.envelope == 1.0);
    CHECK(cert.beta_min == 1.0);

    spec.initial_modes[1].bumps.push_back({-0.5, 0.25, 2.0});
    cert = validate_initial_decay(spec);
    CHECK(cert.envelope == 1.5);
    CHECK(cert.beta_min == 0.25);

    spec.initial_modes[0].bumps.clear();
    spec.initial_modes[1].bumps.clear();
    cert = validate_initial_decay(spec);
    CHECK(cert.envelope == 0.0);
    CHECK(std::isinf(cert.beta_min));
}

TEST_CASE("bump and profile evaluation") {
    const GaussianBump bump{0.5, 2.0, 1.0};
    CHECK(bump(1.0) == 0.5);
    CHECK(bump(2.0) == doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-14));
    const double h = 1e-6;
    const double fd = (bump(0.3 + h) - bump(0.3 - h)) / (2 * h);
    CHECK(bump.derivative(0.3) == doctest::Approx(fd).epsilon(1e-8));

    ModeProfile prof;
    prof.bumps = {GaussianBump{1.0, 1.0, 0.0}, GaussianBump{-0.25, 3.0, 0.5}};
    CHECK(prof.eval(0.5) ==
          doctest::Approx(std::exp(-0.25) - 0.25).epsilon(1e-14));
    CHECK(prof.deriv(0.2) ==
          doctest::Approx(prof.bumps[0].derivative(0.2) +
                          prof.bumps[1].derivative(0.2))
              .epsilon(1e-14));
}

TEST_CASE("nonlinearity evaluation and bounds") {
    Nonlinearity f;
    f.c1 = (Vector(2) << 0.5, 0.0).finished();
    f.c2 = (Vector(2) << -1.0, 2.0).finished();
    const Vector u = (Vector(2) << 2.0, -3.0).finished();
    const Vector v = f.eval(u);
    CHECK(v(0) == 0.5 * 2.0 - 4.0);
    CHECK(v(1) == 2.0 * 9.0);
    const Vector jd = f.jacobian_diag(u);
    CHECK(jd(0) == 0.5 - 4.0);
    CHECK(jd(1) == -12.0);
    CHECK(f.max_abs_derivative(3.0) == doctest::Approx(12.0));
    CHECK_FALSE(f.is_zero());
    CHECK(Nonlinearity{Vector::Zero(2), Vector::Zero(2)}.is_zero());
}

TEST_CASE("initial sampling combines real eigenmodes") {
    const ProblemSpec spec = load_problem_file(SURGE_CONFIG_DIR
                                               "/canonical_twomode.cfg");
    const SpectralData sd = eigendecompose(spec.relaxation, spec.weights);
    const Vector grid = linspace(-2.0, 2.0, 5);
    const GridField field = sample_initial(spec, sd, grid);
    REQUIRE(field.x.size() == 5);
    // w(0) = h0 + 0.5 h1 = (1.5, 0.5)
    CHECK(field.values(2, 0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(field.values(2, 1) == doctest::Approx(0.5).epsilon(1e-14));
    const double w0 = std::exp(-4.0), w1 = 0.5 * std::exp(-8.0);
    CHECK(field.values(4, 0) == doctest::Approx(w0 + w1).epsilon(1e-14));
    CHECK(field.values(4, 1) == doctest::Approx(w0 - w1).epsilon(1e-14));
}

TEST_CASE("domain half-width covers data and transport") {
    const ProblemSpec spec = load_problem(kCanonicalText);
    CHECK(domain_half_width(spec) == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("grid field validation") {
    Vector x = linspace(0.0, 1.0, 5);
    CHECK(GridField::create(x, Matrix::Zero(5, 2)).dx() ==
          doctest::Approx(0.25).epsilon(1e-14));
    CHECK_THROWS_AS(GridField::create(x, Matrix::Zero(4, 2)), NumericsError);
    Vector bad = x;
    bad(3) += 0.01;
    CHECK_THROWS_AS(GridField::create(bad, Matrix::Zero(5, 2)), NumericsError);
    Matrix nan = Matrix::Zero(5, 2);
    nan(1, 1) = std::nan("");
    CHECK_THROWS_AS(GridField::create(x, nan), NumericsError);
}

TEST_CASE("interpolation kernels") {
    // cubic interpolation reproduces cubic polynomials exactly
    const double x0 = -1.0, dx = 0.3;
    const int n = 12;
    Vector vals(n);
    auto poly = [](double x) { return ((2.0 * x - 1.0) * x + 3.0) * x - 0.7; };
    for (int i = 0; i < n; ++i) vals[i] = poly(x0 + i * dx);
    for (double q : {-0.95, -0.4, 0.0, 0.71, 1.3, 2.29}) {
        CHECK(cubic_interp(vals.data(), n, x0, dx, q) ==
              doctest::Approx(poly(q)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(cubic_interp(vals.data(), n, x0, dx, x0 - 0.5), GridError);
    CHECK_THROWS_AS(cubic_interp(vals.data(), n, x0, dx, x0 + (n - 1) * dx + 0.5),
                    GridError);

    // linear interpolation reproduces affine functions exactly
    Vector lin(n);
    for (int i = 0; i < n; ++i) lin[i] = 2.0 * (x0 + i * dx) + 1.0;
    CHECK(linear_interp(lin.data(), n, x0, dx, 0.17) ==
          doctest::Approx(2.0 * 0.17 + 1.0).epsilon(1e-14));

    // clamped variant never overshoots the bracketing values
    Vector bump = Vector::Zero(n);
    bump(5) = 1.0;
    for (double q = x0; q < x0 + (n - 1) * dx; q += 0.07) {
        const double v = cubic_interp_clamped(bump.data(), n, x0, dx, q);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
