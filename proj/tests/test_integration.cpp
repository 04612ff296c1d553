#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "surge/harness.hpp"

#include <string>

using namespace surge;

namespace {

ProblemSpec fixture(const std::string& name) {
    return load_problem_file(std::string(SURGE_CONFIG_DIR) + "/" + name);
}

ConvergenceReport first_order_sweep(const ProblemSpec& spec) {
    SweepOptions opt;
    opt.order = 1;
    opt.eps_values = {0.2, 0.1, 0.05};
    return error_sweep(spec, opt);
}

} // namespace

// End-to-end second-order convergence of the corrected truncation against the
// reference scheme; each fixture exercises a different part of the closure.

TEST_CASE("single-pulse fixture converges at second order") {
    const ConvergenceReport rep = first_order_sweep(fixture("canonical.cfg"));
    CHECK(rep.slope > 1.7);
    CHECK(rep.slope < 2.6);
    const TheoremVerdict v = theorem_check(rep, 0.3);
    CHECK_MESSAGE(v.passed, v.detail);
}

TEST_CASE("asymmetric reaction drives a first-order amplitude source") {
    const ConvergenceReport rep = first_order_sweep(fixture("asym.cfg"));
    CHECK(rep.slope > 1.7);
    const TheoremVerdict v = theorem_check(rep, 0.3);
    CHECK_MESSAGE(v.passed, v.detail);
}

TEST_CASE("two-mode data exercises the layer corrector") {
    const ConvergenceReport rep = first_order_sweep(fixture("canonical_twomode.cfg"));
    CHECK(rep.slope > 1.7);
    const TheoremVerdict v = theorem_check(rep, 0.3);
    CHECK_MESSAGE(v.passed, v.detail);
}
