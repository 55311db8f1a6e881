#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace momentkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ============================================================================
// Core moment types
// ============================================================================

// Closed support interval [a, b], a sub-interval of [-1, 1].
struct Interval {
    double a = -1.0;
    double b = 1.0;
};

// Full monomial moments psi^(0..n) of an angular density over `interval`:
//   psi^(j) = integral_a^b mu^j psi(mu) dmu.
struct MomentVector {
    int order = 0;               // n
    std::vector<double> values;  // length n + 1
    Interval interval;

    MomentVector() = default;
    MomentVector(std::vector<double> vals, Interval iv = {});

    double operator[](int j) const { return values[static_cast<size_t>(j)]; }
    double& operator[](int j) { return values[static_cast<size_t>(j)]; }
};

// Mixed moments: full zeroth moment plus half-interval moments of order 1..n,
//   psi_+^(j) = integral_0^1 mu^j psi dmu,  psi_-^(j) = integral_-1^0 mu^j psi dmu.
// Sign structure for nonnegative densities: psi_+^(j) >= 0, (-1)^j psi_-^(j) >= 0.
struct MixedMomentVector {
    int order = 1;               // n >= 1
    double psi0 = 0.0;
    std::vector<double> plus;    // psi_+^(1..n), index j-1
    std::vector<double> minus;   // psi_-^(1..n), index j-1

    MixedMomentVector() = default;
    MixedMomentVector(double psi0_, std::vector<double> plus_, std::vector<double> minus_);

    double plus_at(int j) const { return plus[static_cast<size_t>(j - 1)]; }    // j in 1..n
    double minus_at(int j) const { return minus[static_cast<size_t>(j - 1)]; }  // j in 1..n

    // Flattened layout used by the finite-volume solver: (psi0, plus..., minus...).
    std::vector<double> flatten() const;
    static MixedMomentVector from_flat(const std::vector<double>& u, int order);
    Vector to_state() const;
    static MixedMomentVector from_state(const Vector& u, int order);
};

// Mixed moments scaled by 1/psi0 (requires psi0 > 0).
struct NormalizedMixedMoments {
    int order = 1;
    std::vector<double> phi_plus;   // Phi_+^(1..n)
    std::vector<double> phi_minus;  // Phi_-^(1..n)

    double plus_at(int j) const { return phi_plus[static_cast<size_t>(j - 1)]; }
    double minus_at(int j) const { return phi_minus[static_cast<size_t>(j - 1)]; }
};

NormalizedMixedMoments normalize(const MixedMomentVector& g);
MixedMomentVector denormalize(const NormalizedMixedMoments& g, double psi0);

// Half-interval assignment of point masses sitting exactly at mu = 0: such an
// atom contributes its full weight to psi^(0), but to half-interval moments of
// order 0 only per this flag (order >= 1 contributions vanish since mu^j = 0).
enum class HalfAssignment { full, plus, minus };

struct Atom {
    double weight = 0.0;    // >= 0
    double position = 0.0;  // in [-1, 1]
    HalfAssignment half = HalfAssignment::full;
};

// Purely atomic angular density sum_i weight_i * delta(mu - position_i).
struct AtomicDensity {
    std::vector<Atom> atoms;
};

// Pointwise tabulated nonnegative angular density on a strictly increasing
// node set; integrals are composite trapezoid on these nodes.
struct TabulatedDensity {
    std::vector<double> mu;
    std::vector<double> values;

    // Samples f on `n_nodes` points spanning [a, b] with a node forced at 0
    // when the interval straddles it. f must be nonnegative.
    static TabulatedDensity sample(const std::function<double(double)>& f, int n_nodes,
                                   double a = -1.0, double b = 1.0);
};

// ============================================================================
// Hankel matrices
// ============================================================================

// A(k) = (psi^(i+j))_{i,j=0..k}; requires 2k <= n.
Matrix hankel_A(const MomentVector& m, int k);
// B(k) = (psi^(i+j+1))_{i,j=0..k}; requires 2k + 1 <= n.
Matrix hankel_B(const MomentVector& m, int k);
// C(k) = (psi^(i+j))_{i,j=1..k}; requires 2k <= n. (k x k, empty for k = 0.)
Matrix hankel_C(const MomentVector& m, int k);

// Half-moment analogues built from one side of a mixed vector; entries of
// order 0 are not available in mixed data, so these never reference them.
// B_pm(k) = (psi_pm^(i+j+1))_{i,j=0..k}, C_pm(k) = (psi_pm^(i+j))_{i,j=1..k},
// D_pm(k) = (psi_pm^(i+j+1))_{i,j=1..k}.
enum class Side { plus, minus };
Matrix hankel_half_B(const MixedMomentVector& g, Side side, int k);
Matrix hankel_half_C(const MixedMomentVector& g, Side side, int k);
Matrix hankel_half_D(const MixedMomentVector& g, Side side, int k);

// ============================================================================
// Moments of densities
// ============================================================================

MomentVector moments_of_density(const TabulatedDensity& d, int n, Interval iv = {});
MomentVector moments_of_density(const AtomicDensity& d, int n, Interval iv = {});

// Weight fraction (0, 1/2 or 1) with which an atom enters a moment integral
// over `iv`; encodes the half-assignment rule for atoms sitting at mu = 0.
double atom_interval_factor(const Atom& at, Interval iv);

MixedMomentVector mixed_moments_of_density(const TabulatedDensity& d, int n);
MixedMomentVector mixed_moments_of_density(const AtomicDensity& d, int n);

// Mixed moments of the isotropic density psi(mu) = psi0 / 2.
MixedMomentVector equilibrium_mixed(double psi0, int order);

// Trapezoid integral of x -> f(x) * mu^j over [a, b] on the tabulated grid,
// splitting cells at interval endpoints that fall between nodes.
double tabulated_moment(const TabulatedDensity& d, int j, double a, double b);

}  // namespace momentkit
