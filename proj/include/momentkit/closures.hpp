#pragma once

#include <string>
#include <utility>
#include <vector>

#include "momentkit/moments.hpp"
#include "momentkit/realizability.hpp"

namespace momentkit {

// ============================================================================
// Model descriptors
// ============================================================================

struct NewtonOptions {
    double tol = 1e-12;
    int max_iter = 200;
};

enum class ClosureKind { pn, m1, k1, mpn, mm1, mk1, mk2 };

struct ClosureModel {
    ClosureKind kind = ClosureKind::pn;
    int order = 1;  // polynomial order for pn/mpn; fixed for the others
    NewtonOptions newton;

    // Accepts "pn:N", "m1", "k1", "mpn:N", "mm1", "mk1", "mk2".
    static ClosureModel parse(const std::string& name);
    std::string name() const;

    int state_size() const;   // number of evolved moment components
    bool is_mixed() const;    // mixed half-moment state layout
    int mixed_order() const;  // n for mixed models (1 for mm1/mk1, 2 for mk2, N for mpn)
};

// All transport operators here have |mu| <= 1, so unit speed bounds every model.
double wave_speed_bound(const ClosureModel& m);

// ============================================================================
// Spherical-harmonic (Legendre) system
// ============================================================================

// Flux matrix and diagonal reaction (absorption + angular diffusion spectrum)
// for the order-n Legendre moment system: reaction[l] = -sigma_a - T/2 l(l+1).
struct PnSystem {
    Matrix flux;      // (n+1) x (n+1) tridiagonal advection matrix
    Vector reaction;  // length n+1
};
PnSystem pn_system(int n, double sigma_a, double T);

// ============================================================================
// Scalar full-moment closures (states (psi0, psi1))
// ============================================================================

// Quadratic interpolating closure: phi2 = (2 phi1^2 + 1) / 3, |phi1| <= 1.
double k1_closure(double phi1);

// Exponential entropy closure: Eddington factor chi(phi1), |phi1| < 1, via the
// dual variable beta solving coth(beta) - 1/beta = phi1.
double m1_closure(double phi1, const NewtonOptions& opt = {});
double m1_dual_beta(double phi1, const NewtonOptions& opt = {});

// ============================================================================
// Mixed-moment closures
// ============================================================================

// Dual variables of the continuous piecewise-exponential ansatz
//   psi(mu) = exp(alpha + beta_plus mu) on [0,1], exp(alpha + beta_minus mu) on [-1,0].
struct EntropyDual {
    double alpha = 0.0;
    double beta_plus = 0.0;
    double beta_minus = 0.0;
    double mass_plus = 0.0;   // integral of the ansatz over [0, 1]
    double mass_minus = 0.0;  // integral of the ansatz over [-1, 0]
};
EntropyDual mm1_dual_solve(const MixedMomentVector& g, const NewtonOptions& opt = {});

struct Mm1Closure {
    double psi2_plus = 0.0;
    double psi2_minus = 0.0;
    double psi_at_zero = 0.0;
    double psi0_plus = 0.0;   // half masses of the ansatz
    double psi0_minus = 0.0;
};
Mm1Closure mm1_closure(const MixedMomentVector& g, const NewtonOptions& opt = {});

// Continuous piecewise-polynomial ansatz alpha + sum_i beta_pm^(i) mu^i per
// half; the coefficients solve a (2n+1)-square linear system.
struct MpnCoefficients {
    double alpha = 0.0;
    std::vector<double> beta_plus;
    std::vector<double> beta_minus;
};
MpnCoefficients mpn_solve(const MixedMomentVector& g);

struct MpnClosure {
    double psi_next_plus = 0.0;   // psi_+^(n+1) of the ansatz
    double psi_next_minus = 0.0;  // psi_-^(n+1)
    double psi_at_zero = 0.0;     // ansatz value at mu = 0 (= alpha)
    double psi0_plus = 0.0;       // half masses of the ansatz
    double psi0_minus = 0.0;
};
MpnClosure mpn_closure(const MixedMomentVector& g);

// First-order Kershaw closure: interpolates the atomic boundary densities,
//   phi_pm^(2) = +- 1/3 phi_pm^(1) +- 2/3 phi_pm^(1) (phi_+^(1) - phi_-^(1)).
std::pair<double, double> mk1_closure(double phi1_plus, double phi1_minus);

// Second-order Kershaw closure: equal-weight combination of the lower and
// upper third-moment boundaries of an order-2 mixed vector.
std::pair<double, double> mk2_closure(const NormalizedMixedMoments& g);

// Third-moment boundary values used by mk2 (exposed for tests: the upper pair
// saturates the order-3 coupling condition).
std::pair<double, double> mk2_lower_boundary(const NormalizedMixedMoments& g);
std::pair<double, double> mk2_upper_boundary(const NormalizedMixedMoments& g);

// ============================================================================
// Angular diffusion source for mixed-moment systems
// ============================================================================

// Pointwise data a closure's representing ansatz supplies to the collision
// moments: the density value at mu = 0 and the half masses.
struct AnsatzTrace {
    double psi_at_zero = 0.0;
    double psi0_plus = 0.0;
    double psi0_minus = 0.0;
};

// Moments of T/2 d/dmu[(1-mu^2) d psi/dmu] in the mixed layout
// (full zeroth, plus 1..n, minus 1..n). The zeroth component is exactly 0;
//   m = 1:  T/2 (+- psi(0) - 2 psi_pm^(1)),
//   m >= 2: T/2 (m(m-1) psi_pm^(m-2) - m(m+1) psi_pm^(m)),
// with the half masses psi_pm^(0) taken from the ansatz trace.
std::vector<double> laplace_beltrami_moments(const MixedMomentVector& g, const AnsatzTrace& trace,
                                             double T);

}  // namespace momentkit
