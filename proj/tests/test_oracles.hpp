#pragma once

// Shared test oracles: high-precision Simpson quadrature (independent of the
// library's trapezoid integrators), random density generators, and analytic
// identities used across the suites.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "momentkit/moments.hpp"

namespace oracle {

// Composite Simpson on [a, b] with n (even) intervals; error O(h^4).
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

inline double moment_of(const std::function<double(double)>& psi, int j, double a, double b) {
    return simpson([&](double mu) { return std::pow(mu, j) * psi(mu); }, a, b);
}

// ============================================================================
// Polynomials and exp(poly) densities
// ============================================================================

struct Poly {
    std::vector<double> c;  // value = sum_i c[i] mu^i

    double operator()(double mu) const {
        double v = 0.0, p = 1.0;
        for (double ci : c) {
            v += ci * p;
            p *= mu;
        }
        return v;
    }

    Poly deriv() const {
        Poly d;
        for (size_t i = 1; i < c.size(); ++i) d.c.push_back(static_cast<double>(i) * c[i]);
        return d;
    }
};

inline Poly random_poly(std::mt19937& rng, int degree, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Poly p;
    for (int i = 0; i <= degree; ++i) p.c.push_back(u(rng));
    return p;
}

// Strictly positive smooth density exp(p(mu)).
struct ExpPoly {
    Poly p;
    double operator()(double mu) const { return std::exp(p(mu)); }
};

// Laplace-Beltrami image of exp(p):
//   d/dmu[(1 - mu^2) d/dmu exp(p)] = [(1 - mu^2)(p'' + p'^2) - 2 mu p'] exp(p).
inline double laplace_beltrami_of_exp_poly(const Poly& p, double mu) {
    const Poly d1 = p.deriv();
    const Poly d2 = d1.deriv();
    const double dp = d1(mu);
    return ((1.0 - mu * mu) * (d2(mu) + dp * dp) - 2.0 * mu * dp) * std::exp(p(mu));
}

// ============================================================================
// Random measures
// ============================================================================

// Random atoms with positive weights; positions strictly inside the halves so
// half-interval membership is unambiguous.
inline momentkit::AtomicDensity random_atoms(std::mt19937& rng, int count) {
    std::uniform_real_distribution<double> w(0.1, 2.0);
    std::uniform_real_distribution<double> pos(-0.999, 0.999);
    momentkit::AtomicDensity d;
    for (int i = 0; i < count; ++i) {
        double mu = pos(rng);
        if (std::abs(mu) < 1e-3) mu = mu < 0 ? -1e-3 : 1e-3;
        d.atoms.push_back(momentkit::Atom{w(rng), mu, momentkit::HalfAssignment::full});
    }
    return d;
}

inline momentkit::TabulatedDensity sampled_exp_poly(std::mt19937& rng, int degree, double scale,
                                                    int nodes = 4001) {
    const ExpPoly f{random_poly(rng, degree, scale)};
    return momentkit::TabulatedDensity::sample([&](double mu) { return f(mu); }, nodes);
}

}  // namespace oracle
