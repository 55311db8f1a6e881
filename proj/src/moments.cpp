#include "momentkit/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace momentkit {

// ============================================================================
// Construction and validation
// ============================================================================

MomentVector::MomentVector(std::vector<double> vals, Interval iv)
    : order(static_cast<int>(vals.size()) - 1), values(std::move(vals)), interval(iv) {
    if (values.empty()) throw std::invalid_argument("MomentVector: needs at least psi^(0)");
    if (!(interval.a < interval.b) || interval.a < -1.0 || interval.b > 1.0)
        throw std::invalid_argument("MomentVector: interval must satisfy -1 <= a < b <= 1");
}

MixedMomentVector::MixedMomentVector(double psi0_, std::vector<double> plus_,
                                     std::vector<double> minus_)
    : order(static_cast<int>(plus_.size())), psi0(psi0_), plus(std::move(plus_)),
      minus(std::move(minus_)) {
    if (plus.empty() || plus.size() != minus.size())
        throw std::invalid_argument("MixedMomentVector: plus/minus must have equal size >= 1");
}

std::vector<double> MixedMomentVector::flatten() const {
    std::vector<double> u;
    u.reserve(1 + plus.size() + minus.size());
    u.push_back(psi0);
    u.insert(u.end(), plus.begin(), plus.end());
    u.insert(u.end(), minus.begin(), minus.end());
    return u;
}

MixedMomentVector MixedMomentVector::from_flat(const std::vector<double>& u, int order) {
    if (static_cast<int>(u.size()) != 2 * order + 1)
        throw std::invalid_argument("MixedMomentVector::from_flat: size mismatch");
    MixedMomentVector g;
    g.order = order;
    g.psi0 = u[0];
    g.plus.assign(u.begin() + 1, u.begin() + 1 + order);
    g.minus.assign(u.begin() + 1 + order, u.end());
    return g;
}

Vector MixedMomentVector::to_state() const {
    std::vector<double> u = flatten();
    return Eigen::Map<const Vector>(u.data(), static_cast<Eigen::Index>(u.size()));
}

MixedMomentVector MixedMomentVector::from_state(const Vector& u, int order) {
    return from_flat(std::vector<double>(u.data(), u.data() + u.size()), order);
}

NormalizedMixedMoments normalize(const MixedMomentVector& g) {
    if (!(g.psi0 > 0.0)) throw std::domain_error("normalize: psi0 must be positive");
    NormalizedMixedMoments out;
    out.order = g.order;
    out.phi_plus.resize(g.plus.size());
    out.phi_minus.resize(g.minus.size());
    for (size_t i = 0; i < g.plus.size(); ++i) {
        out.phi_plus[i] = g.plus[i] / g.psi0;
        out.phi_minus[i] = g.minus[i] / g.psi0;
    }
    return out;
}

MixedMomentVector denormalize(const NormalizedMixedMoments& g, double psi0) {
    MixedMomentVector out;
    out.order = g.order;
    out.psi0 = psi0;
    out.plus.resize(g.phi_plus.size());
    out.minus.resize(g.phi_minus.size());
    for (size_t i = 0; i < g.phi_plus.size(); ++i) {
        out.plus[i] = psi0 * g.phi_plus[i];
        out.minus[i] = psi0 * g.phi_minus[i];
    }
    return out;
}

TabulatedDensity TabulatedDensity::sample(const std::function<double(double)>& f, int n_nodes,
                                          double a, double b) {
    if (n_nodes < 2) throw std::invalid_argument("TabulatedDensity::sample: n_nodes < 2");
    if (!(a < b)) throw std::invalid_argument("TabulatedDensity::sample: empty interval");
    TabulatedDensity d;
    d.mu.reserve(static_cast<size_t>(n_nodes) + 1);
    if (a < 0.0 && 0.0 < b) {
        // Split the node budget across the two halves so mu = 0 is a node.
        int n_left = std::max(2, static_cast<int>(std::lround(n_nodes * (-a) / (b - a))) + 1);
        int n_right = std::max(2, n_nodes - n_left + 1);
        for (int i = 0; i < n_left; ++i)
            d.mu.push_back(a + (0.0 - a) * i / (n_left - 1));
        for (int i = 1; i < n_right; ++i)
            d.mu.push_back(0.0 + (b - 0.0) * i / (n_right - 1));
    } else {
        for (int i = 0; i < n_nodes; ++i)
            d.mu.push_back(a + (b - a) * i / (n_nodes - 1));
    }
    d.values.resize(d.mu.size());
    for (size_t i = 0; i < d.mu.size(); ++i) {
        double v = f(d.mu[i]);
        if (!(v >= 0.0)) throw std::domain_error("TabulatedDensity::sample: negative value");
        d.values[i] = v;
    }
    return d;
}

// ============================================================================
// Hankel matrices
// ============================================================================

Matrix hankel_A(const MomentVector& m, int k) {
    if (k < 0 || 2 * k > m.order) throw std::invalid_argument("hankel_A: need 2k <= n");
    Matrix A(k + 1, k + 1);
    for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k; ++j) A(i, j) = m[i + j];
    return A;
}

Matrix hankel_B(const MomentVector& m, int k) {
    if (k < 0 || 2 * k + 1 > m.order) throw std::invalid_argument("hankel_B: need 2k+1 <= n");
    Matrix B(k + 1, k + 1);
    for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k; ++j) B(i, j) = m[i + j + 1];
    return B;
}

Matrix hankel_C(const MomentVector& m, int k) {
    if (k < 0 || 2 * k > m.order) throw std::invalid_argument("hankel_C: need 2k <= n");
    Matrix C(k, k);
    for (int i = 1; i <= k; ++i)
        for (int j = 1; j <= k; ++j) C(i - 1, j - 1) = m[i + j];
    return C;
}

namespace {
double half_at(const MixedMomentVector& g, Side side, int j) {
    return side == Side::plus ? g.plus_at(j) : g.minus_at(j);
}
}  // namespace

Matrix hankel_half_B(const MixedMomentVector& g, Side side, int k) {
    if (k < 0 || 2 * k + 1 > g.order)
        throw std::invalid_argument("hankel_half_B: need 2k+1 <= n");
    Matrix B(k + 1, k + 1);
    for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k; ++j) B(i, j) = half_at(g, side, i + j + 1);
    return B;
}

Matrix hankel_half_C(const MixedMomentVector& g, Side side, int k) {
    if (k < 0 || 2 * k > g.order) throw std::invalid_argument("hankel_half_C: need 2k <= n");
    Matrix C(k, k);
    for (int i = 1; i <= k; ++i)
        for (int j = 1; j <= k; ++j) C(i - 1, j - 1) = half_at(g, side, i + j);
    return C;
}

Matrix hankel_half_D(const MixedMomentVector& g, Side side, int k) {
    if (k < 0 || 2 * k + 1 > g.order)
        throw std::invalid_argument("hankel_half_D: need 2k+1 <= n");
    Matrix D(k, k);
    for (int i = 1; i <= k; ++i)
        for (int j = 1; j <= k; ++j) D(i - 1, j - 1) = half_at(g, side, i + j + 1);
    return D;
}

// ============================================================================
// Moments of densities
// ============================================================================

double tabulated_moment(const TabulatedDensity& d, int j, double a, double b) {
    const auto& mu = d.mu;
    const auto& v = d.values;
    if (mu.size() < 2 || mu.size() != v.size())
        throw std::invalid_argument("tabulated_moment: malformed density");
    a = std::max(a, mu.front());
    b = std::min(b, mu.back());
    if (!(a < b)) return 0.0;

    auto interp = [&](double x) {
        auto it = std::upper_bound(mu.begin(), mu.end(), x);
        size_t hi = std::min(static_cast<size_t>(it - mu.begin()), mu.size() - 1);
        size_t lo = hi - (hi > 0 ? 1 : 0);
        if (hi == lo) return v[lo];
        double t = (x - mu[lo]) / (mu[hi] - mu[lo]);
        return v[lo] + t * (v[hi] - v[lo]);
    };
    auto f = [&](double x, double val) { return val * std::pow(x, j); };

    // Trapezoid over cells clipped to [a, b].
    double total = 0.0;
    for (size_t i = 0; i + 1 < mu.size(); ++i) {
        double lo = std::max(mu[i], a), hi = std::min(mu[i + 1], b);
        if (!(lo < hi)) continue;
        double flo = f(lo, lo == mu[i] ? v[i] : interp(lo));
        double fhi = f(hi, hi == mu[i + 1] ? v[i + 1] : interp(hi));
        total += 0.5 * (flo + fhi) * (hi - lo);
    }
    return total;
}

MomentVector moments_of_density(const TabulatedDensity& d, int n, Interval iv) {
    if (n < 0) throw std::invalid_argument("moments_of_density: n < 0");
    std::vector<double> vals(static_cast<size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) vals[static_cast<size_t>(j)] = tabulated_moment(d, j, iv.a, iv.b);
    return MomentVector(std::move(vals), iv);
}

// Weight fraction (0, 1/2 or 1) of an atom in the moment integral over
// [a, b]. Atoms at mu = 0 on a half-interval edge contribute per their
// assignment so that half-masses sum to the full mass.
double atom_interval_factor(const Atom& at, Interval iv) {
    double mu = at.position;
    if (mu < iv.a || mu > iv.b) return 0.0;
    if (mu != 0.0) return 1.0;
    bool edge = (iv.a == 0.0 || iv.b == 0.0);
    if (!edge) return 1.0;
    bool plus_side = (iv.a == 0.0);
    switch (at.half) {
        case HalfAssignment::plus: return plus_side ? 1.0 : 0.0;
        case HalfAssignment::minus: return plus_side ? 0.0 : 1.0;
        case HalfAssignment::full: return 0.5;
    }
    return 0.0;
}

MomentVector moments_of_density(const AtomicDensity& d, int n, Interval iv) {
    if (n < 0) throw std::invalid_argument("moments_of_density: n < 0");
    std::vector<double> vals(static_cast<size_t>(n) + 1, 0.0);
    for (const Atom& at : d.atoms) {
        double fac = atom_interval_factor(at, iv);
        if (fac == 0.0) continue;
        double p = 1.0;
        for (int j = 0; j <= n; ++j) {
            vals[static_cast<size_t>(j)] += fac * at.weight * p;
            p *= at.position;
        }
    }
    return MomentVector(std::move(vals), iv);
}

template <class Density>
static MixedMomentVector mixed_from(const Density& d, int n) {
    if (n < 1) throw std::invalid_argument("mixed_moments_of_density: n < 1");
    MomentVector full = moments_of_density(d, 0, Interval{-1.0, 1.0});
    MomentVector up = moments_of_density(d, n, Interval{0.0, 1.0});
    MomentVector dn = moments_of_density(d, n, Interval{-1.0, 0.0});
    MixedMomentVector g;
    g.order = n;
    g.psi0 = full[0];
    g.plus.assign(up.values.begin() + 1, up.values.end());
    g.minus.assign(dn.values.begin() + 1, dn.values.end());
    return g;
}

MixedMomentVector mixed_moments_of_density(const TabulatedDensity& d, int n) {
    return mixed_from(d, n);
}

MixedMomentVector mixed_moments_of_density(const AtomicDensity& d, int n) {
    return mixed_from(d, n);
}

MixedMomentVector equilibrium_mixed(double psi0, int order) {
    if (order < 1) throw std::invalid_argument("equilibrium_mixed: order < 1");
    MixedMomentVector g;
    g.order = order;
    g.psi0 = psi0;
    g.plus.resize(static_cast<size_t>(order));
    g.minus.resize(static_cast<size_t>(order));
    for (int j = 1; j <= order; ++j) {
        double m = 0.5 * psi0 / (j + 1);  // psi0/2 * integral_0^1 mu^j
        g.plus[static_cast<size_t>(j - 1)] = m;
        g.minus[static_cast<size_t>(j - 1)] = (j % 2 == 0 ? m : -m);
    }
    return g;
}

}  // namespace momentkit
