#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace surge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Raised for malformed or invalid problem documents (bad grammar,
/// failed field validation). CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical routine cannot proceed (degenerate spectrum,
/// unsolvable projection, blow-up, inconclusive refinement).
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when an evaluation needs profile data outside the stored grids
/// and the stored tails are not certified negligible.
struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fixed tolerances of the spectral layer. The scale-dependent ones take the
// relevant norm as argument so call sites cannot mix them up.
namespace tol {
inline double zero_eigenvalue(double L_norm) { return 1e-9 * L_norm; }
inline constexpr double ortho = 1e-10;
inline constexpr double pair = 1e-9;
inline double distinct(double L_norm) { return 1e-8 * L_norm; }
inline double solvable(double f_norm) { return 1e-9 * f_norm; }
/// Floor used when checking strict inequalities on grids.
inline constexpr double strict_floor = 1e-12;
/// Profile edge values below this are treated as exact zero outside the grid.
inline constexpr double profile_tail = 1e-12;
} // namespace tol

/// FNV-1a 64-bit content hash (manifest reproducibility, not cryptographic).
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Round-trip-safe formatting of a double (17 significant digits).
std::string format_double(double v);

/// Cubic Lagrange interpolation on a uniform grid.
/// `values` has n samples at x0 + i*dx; queries clamp the stencil at the
/// ends (falling back to the one-sided cubic) and must lie inside the grid.
double cubic_interp(const double* values, int n, double x0, double dx, double x);

/// Same stencil, but the result is clamped to the [min,max] of the two
/// bracketing samples: monotone, positivity preserving.
double cubic_interp_clamped(const double* values, int n, double x0, double dx, double x);

/// Linear interpolation on a uniform grid (first-order scheme variant).
double linear_interp(const double* values, int n, double x0, double dx, double x);

} // namespace surge
