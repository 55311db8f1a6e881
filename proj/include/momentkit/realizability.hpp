#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "momentkit/moments.hpp"

namespace momentkit {

// Thrown when a closed-form expression loses significance (vacuum/beam states)
// and the caller should fall back to a projection or limit value.
struct DegenerateCaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an iterative solve fails to converge.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ============================================================================
// Realizability verdicts
// ============================================================================

enum class Condition { none, hankel_psd, hausdorff_pair, range, coupling };

std::string to_string(Condition c);

// margin: smallest slack among all tested conditions (eigenvalue slacks of the
// matrix conditions and the scalar coupling slack; a failed range test
// contributes minus its relative residual). realizable <=> margin >= -tol.
struct RealizabilityVerdict {
    bool realizable = false;
    double margin = 0.0;
    Condition failed = Condition::none;
};

// Full-moment realizability on m.interval (two-sided Hankel conditions).
RealizabilityVerdict is_realizable_full(const MomentVector& m, double tol);

// Mixed-moment realizability: per-half conditions that avoid the unavailable
// half zeroth moments, range conditions, and a coupling lower bound on psi0.
RealizabilityVerdict is_realizable_mixed(const MixedMomentVector& g, double tol);

// ============================================================================
// Atomic representations
// ============================================================================

// Monic generating polynomial g(mu) = mu^rank - sum_{i<rank} coeffs[i] mu^i
// whose roots are the atom positions of a minimal representing measure.
struct GeneratingFunction {
    int rank = 0;
    std::vector<double> coeffs;  // length == rank

    double eval(double mu) const;
    // Real roots (validated: imaginary parts below `imag_tol`).
    std::vector<double> roots(double imag_tol = 1e-9) const;
};

// Minimal atomic measure representing a realizable full moment vector. The
// result reproduces psi^(0..min(n, 2r-1)) where r is the detected Hankel rank;
// on the realizability boundary it reproduces all given moments.
AtomicDensity minimal_atomic_measure(const MomentVector& m);

// Generating-function coefficients for the requested half of a mixed vector,
// in the reflected variable gamma_i = (+-1)^i psi_pm^(i). Supports n <= 6.
GeneratingFunction mixed_generating_coefficients(Side side, const MixedMomentVector& g);

// Atoms and weights for one half of a mixed vector, mapped back to the
// physical half-interval (positions in [0,1] for plus, [-1,0] for minus).
AtomicDensity mixed_atomic_side(Side side, const MixedMomentVector& g);

// Largest realizable point on the segment from equilibrium (same psi0) to g;
// returns g unchanged when it is already realizable. Bisection to 1e-10 in
// the segment parameter.
MixedMomentVector project_to_realizable(const MixedMomentVector& g, double tol);

// ============================================================================
// Shared numerical helpers (exposed for tests)
// ============================================================================

// Smallest eigenvalue of a symmetric matrix (0x0 matrices have none: +inf).
double min_eigenvalue(const Matrix& M);

// Pseudo-inverse quadratic form b^T M^+ b via eigendecomposition with relative
// cutoff 1e-12 * max |eigenvalue|. Also reports the relative range residual
// ||M w - b|| / ||b|| (0 when b = 0).
struct PinvQuadResult {
    double value = 0.0;
    double residual = 0.0;
};
PinvQuadResult pinv_quadratic_form(const Matrix& M, const Vector& b);

// Roots of the monic polynomial x^r - sum_{i<r} c[i] x^i via its companion
// matrix; returns real parts paired with max |imaginary part| seen.
struct PolyRoots {
    std::vector<double> real;
    double max_imag = 0.0;
};
PolyRoots monic_roots(const std::vector<double>& c);

}  // namespace momentkit
