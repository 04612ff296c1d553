#pragma once

#include "surge/model.hpp"
#include "surge/refsolver.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace surge {

// Domain of determination of the apex (x0, t0): base [m2(), m1()] on t = 0,
// sides traced by the extreme characteristic speeds.
struct Triangle {
    double x0 = 0.0;
    double t0 = 0.0;
    double d_min = 0.0;
    double d_max = 0.0;

    double m1() const { return x0 - d_min * t0; }
    double m2() const { return x0 - d_max * t0; }
    // boundary-inclusive membership: both extreme backward feet land in
    // [m2, m1] and 0 <= t <= t0
    bool contains(double x, double t) const;
};

Triangle characteristic_triangle(double x0, double t0, const Vector& speeds);

enum class LemmaStatus { pass, fail, hypothesis_not_met };

struct LemmaVerdict {
    LemmaStatus status = LemmaStatus::fail;
    double margin = 0.0; // smallest witnessed strict margin
    std::string detail;
};

// Comparison of two resolvent solutions: with op inverse-positive and
// f2 > |f1| strictly, the solutions satisfy y2 > |y1| strictly.
// Inverse positivity is probed on the basis vectors.
LemmaVerdict lemma1_comparison(const Matrix& op, const Vector& f1, const Vector& f2);

// One linear transport-relaxation problem u_t + D u_x = L u + f, u(.,0) = u0,
// posed on the whole line (fields given as callables).
struct ComparisonInstance {
    Matrix relaxation;
    Vector speeds;
    std::function<double(double, int)> initial;         // u0(x, state)
    std::function<double(double, double, int)> source;  // f(x, t, state), may be empty
};

struct LemmaGrid {
    double dx = 0.02;
    double cfl = 0.9;
    InterpKind interp = InterpKind::linear; // monotone transport
};

// Number of uniform time levels the triangle drivers take to reach tri.t0.
int triangle_step_count(const Triangle& tri, const Vector& speeds,
                        const LemmaGrid& grid);

// Positivity on the triangle: operator Metzler with one-signed zero mode,
// u0 > 0 on the base, f > 0 inside => u > 0 at every interior node.
LemmaVerdict lemma2_positivity(const ComparisonInstance& inst, const Triangle& tri,
                               const LemmaGrid& grid = {});

// Barrier comparison: same operator and speeds, u1_0 > |u2_0|, f1 > |f2|
// => u1 > |u2| on the triangle; decided by positivity of the sum and
// difference systems.
LemmaVerdict lemma3_barrier(const ComparisonInstance& u1, const ComparisonInstance& u2,
                            const Triangle& tri, const LemmaGrid& grid = {});

struct BoundSample {
    ComparisonInstance inst;
    Triangle tri;
};

struct BoundEstimate {
    double c_hat = 0.0;
    std::vector<double> ratios; // per sample; skipped entries are NaN
    int skipped = 0;
};

// A-priori bound constant: c_hat = max over samples of
// sup_triangle |u| / (sup_base |u0| + t0 sup_triangle |f|).
BoundEstimate lemma4_bound(const std::vector<BoundSample>& samples,
                           const LemmaGrid& grid = {});

struct NonlinearBoundResult {
    LemmaStatus status = LemmaStatus::fail;
    double t0_used = 0.0;
    double c_hat = 0.0; // from the linear bound on the same instance
    double ratio = 0.0;
    std::string detail;
};

// Nonlinear variant: adds a per-state quadratic reaction f2 (f2(0) = 0),
// valid while |u| < K; the admissible horizon is found by halving t0.
// Requires sup |u0| < K / min(h0).
NonlinearBoundResult lemma5_nonlinear_bound(const ComparisonInstance& inst,
                                            const Nonlinearity& f2, double cap,
                                            const Triangle& tri,
                                            const LemmaGrid& grid = {});

// seeded random families ------------------------------------------------

// Metzler operator with zero row sums: off-diagonal U(0.1, 1), diagonal the
// negated row sum, so the all-ones vector spans the kernel.
Matrix random_metzler_laplacian(std::mt19937_64& rng, int m);
ComparisonInstance random_positive_instance(std::mt19937_64& rng, int m);
Triangle random_triangle(std::mt19937_64& rng, const Vector& speeds);

struct SuiteResult {
    std::string name;
    int total = 0;
    int passed = 0;
    int failed = 0;
    int skipped = 0;
    double c_hat = 0.0;
    bool ok = false;
    std::string summary;
    std::vector<std::string> csv_rows; // header first
};

SuiteResult run_lemma1_suite(int count, unsigned long long seed);
SuiteResult run_lemma2_suite(int count, unsigned long long seed);
SuiteResult run_lemma3_suite(int count, unsigned long long seed);
// also reruns at dx/2 and requires the bound constant stable to 5%
SuiteResult run_lemma4_suite(int count, unsigned long long seed);
// canonical quadratic damping + tenfold operator rescaling (constant moves <= 10%)
SuiteResult run_lemma5_suite(unsigned long long seed);

} // namespace surge
