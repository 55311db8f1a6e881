#include "momentkit/realizability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace momentkit {

// ============================================================================
// Shared numerical helpers
// ============================================================================

double min_eigenvalue(const Matrix& M) {
    if (M.rows() == 0) return std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

PinvQuadResult pinv_quadratic_form(const Matrix& M, const Vector& b) {
    PinvQuadResult out;
    if (M.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    const Vector& lam = es.eigenvalues();
    double lam_max = lam.cwiseAbs().maxCoeff();
    double cutoff = 1e-12 * lam_max;
    Vector bt = es.eigenvectors().transpose() * b;
    Vector wt(bt.size());
    for (Eigen::Index i = 0; i < bt.size(); ++i)
        wt[i] = (std::abs(lam[i]) > cutoff) ? bt[i] / lam[i] : 0.0;
    Vector w = es.eigenvectors() * wt;
    out.value = b.dot(w);
    double bn = b.norm();
    out.residual = bn > 0.0 ? (M * w - b).norm() / bn : 0.0;
    return out;
}

PolyRoots monic_roots(const std::vector<double>& c) {
    PolyRoots out;
    int r = static_cast<int>(c.size());
    if (r == 0) return out;
    if (r == 1) {  // x = c[0]
        out.real.push_back(c[0]);
        return out;
    }
    Matrix comp = Matrix::Zero(r, r);
    for (int i = 0; i < r - 1; ++i) comp(i + 1, i) = 1.0;
    for (int i = 0; i < r; ++i) comp(i, r - 1) = c[static_cast<size_t>(i)];
    Eigen::EigenSolver<Matrix> es(comp);
    for (int i = 0; i < r; ++i) {
        out.real.push_back(es.eigenvalues()[i].real());
        out.max_imag = std::max(out.max_imag, std::abs(es.eigenvalues()[i].imag()));
    }
    std::sort(out.real.begin(), out.real.end());
    return out;
}

std::string to_string(Condition c) {
    switch (c) {
        case Condition::none: return "none";
        case Condition::hankel_psd: return "hankel-psd";
        case Condition::hausdorff_pair: return "hausdorff-pair";
        case Condition::range: return "range";
        case Condition::coupling: return "coupling";
    }
    return "?";
}

// ============================================================================
// Verdict assembly
// ============================================================================

namespace {

struct VerdictBuilder {
    double tol;
    double margin = std::numeric_limits<double>::infinity();
    bool ok = true;
    Condition failed = Condition::none;

    void note(Condition c, double slack, bool pass) {
        if (slack < margin) margin = slack;
        if (!pass && ok) {
            ok = false;
            failed = c;
        }
    }
    void psd(Condition c, const Matrix& M) {
        double s = min_eigenvalue(M);
        if (std::isinf(s)) return;  // empty condition
        note(c, s, s >= -tol);
    }
    void scalar(Condition c, double slack) { note(c, slack, slack >= -tol); }
    void range(double residual) {
        // A failed range test drives the margin below -tol by its residual.
        if (residual > tol) note(Condition::range, -residual, false);
    }
    RealizabilityVerdict finish() const {
        RealizabilityVerdict v;
        v.realizable = ok;
        v.margin = std::isinf(margin) ? 0.0 : margin;
        v.failed = ok ? Condition::none : failed;
        return v;
    }
};

}  // namespace

RealizabilityVerdict is_realizable_full(const MomentVector& m, double tol) {
    VerdictBuilder vb{tol};
    const double a = m.interval.a, b = m.interval.b;
    const int n = m.order;
    if (n == 0) {
        vb.scalar(Condition::hankel_psd, m[0]);
        return vb.finish();
    }
    if (n % 2 == 1) {  // n = 2k+1: b A(k) >= B(k) >= a A(k)
        int k = (n - 1) / 2;
        Matrix A = hankel_A(m, k), B = hankel_B(m, k);
        vb.psd(Condition::hausdorff_pair, b * A - B);
        vb.psd(Condition::hausdorff_pair, B - a * A);
    } else {  // n = 2k: A(k) >= 0 and (a+b) B(k-1) >= a b A(k-1) + C(k)
        int k = n / 2;
        vb.psd(Condition::hankel_psd, hankel_A(m, k));
        Matrix M = (a + b) * hankel_B(m, k - 1) - a * b * hankel_A(m, k - 1) - hankel_C(m, k);
        vb.psd(Condition::hausdorff_pair, M);
    }
    return vb.finish();
}

RealizabilityVerdict is_realizable_mixed(const MixedMomentVector& g, double tol) {
    VerdictBuilder vb{tol};
    const int n = g.order;
    if (n % 2 == 1) {  // n = 2k+1
        int k = (n - 1) / 2;
        Matrix Bp = hankel_half_B(g, Side::plus, k);
        Matrix Bm = hankel_half_B(g, Side::minus, k);
        vb.psd(Condition::hankel_psd, Bp);
        vb.psd(Condition::hankel_psd, -Bm);
        double bound = g.plus_at(1) - g.minus_at(1);
        if (k >= 1) {
            Matrix Mp = hankel_half_C(g, Side::plus, k) - hankel_half_D(g, Side::plus, k);
            Matrix Mm = hankel_half_C(g, Side::minus, k) + hankel_half_D(g, Side::minus, k);
            vb.psd(Condition::hausdorff_pair, Mp);
            vb.psd(Condition::hausdorff_pair, Mm);
            Vector bp(k), bm(k);
            for (int i = 1; i <= k; ++i) {
                bp[i - 1] = g.plus_at(i) - g.plus_at(i + 1);
                bm[i - 1] = g.minus_at(i) + g.minus_at(i + 1);
            }
            PinvQuadResult qp = pinv_quadratic_form(Mp, bp);
            PinvQuadResult qm = pinv_quadratic_form(Mm, bm);
            vb.range(qp.residual);
            vb.range(qm.residual);
            bound += qp.value + qm.value;
        }
        vb.scalar(Condition::coupling, g.psi0 - bound);
    } else {  // n = 2k
        int k = n / 2;
        Matrix Hp = hankel_half_B(g, Side::plus, k - 1) - hankel_half_C(g, Side::plus, k);
        Matrix Hm = -hankel_half_B(g, Side::minus, k - 1) - hankel_half_C(g, Side::minus, k);
        vb.psd(Condition::hausdorff_pair, Hp);
        vb.psd(Condition::hausdorff_pair, Hm);
        Matrix Cp = hankel_half_C(g, Side::plus, k);
        Matrix Cm = hankel_half_C(g, Side::minus, k);
        vb.psd(Condition::hankel_psd, Cp);
        vb.psd(Condition::hankel_psd, Cm);
        Vector bp(k), bm(k);
        for (int i = 1; i <= k; ++i) {
            bp[i - 1] = g.plus_at(i);
            bm[i - 1] = g.minus_at(i);
        }
        PinvQuadResult qp = pinv_quadratic_form(Cp, bp);
        PinvQuadResult qm = pinv_quadratic_form(Cm, bm);
        vb.range(qp.residual);
        vb.range(qm.residual);
        vb.scalar(Condition::coupling, g.psi0 - qp.value - qm.value);
    }
    return vb.finish();
}

// ============================================================================
// Minimal atomic measures (full moments)
// ============================================================================

double GeneratingFunction::eval(double mu) const {
    double p = 1.0, acc = 0.0;
    for (int i = 0; i < rank; ++i) {
        acc += coeffs[static_cast<size_t>(i)] * p;
        p *= mu;
    }
    return p - acc;
}

std::vector<double> GeneratingFunction::roots(double imag_tol) const {
    PolyRoots pr = monic_roots(coeffs);
    if (pr.max_imag > imag_tol)
        throw std::runtime_error("GeneratingFunction::roots: complex roots beyond tolerance");
    return pr.real;
}

namespace {

constexpr double kRankTol = 1e-10;   // relative threshold on leading minors
constexpr double kRootImagTol = 1e-9;
constexpr double kRootClampTol = 1e-9;

// Hankel rank of the normalized vector: number of consecutive leading
// principal minors of A(K) above the relative threshold.
int hankel_rank(const MomentVector& m) {
    int K = m.order / 2;
    Matrix A = hankel_A(m, K);
    int r = 0;
    for (int j = 1; j <= K + 1; ++j) {
        double det = A.topLeftCorner(j, j).determinant();
        if (std::abs(det) > kRankTol)
            r = j;
        else
            break;
    }
    return r;
}

// Upper/lower admissible extension psi^(n+1) for an even-order vector, from
// the corner Schur complements of the two odd-order Hausdorff matrices.
std::pair<double, double> extension_bounds(const MomentVector& m) {
    const double a = m.interval.a, b = m.interval.b;
    const int k = m.order / 2;
    MomentVector ext = m;
    ext.order += 1;
    ext.values.push_back(0.0);
    Matrix M = b * hankel_A(ext, k) - hankel_B(ext, k);   // corner = b psi^(2k) - t
    Matrix N = hankel_B(ext, k) - a * hankel_A(ext, k);   // corner = t - a psi^(2k)
    auto corner_bound = [&](const Matrix& X) {
        int r = static_cast<int>(X.rows());
        Matrix ll = X.topLeftCorner(r - 1, r - 1);
        Vector v = X.topRightCorner(r - 1, 1);
        return pinv_quadratic_form(ll, v).value;
    };
    double psi_2k = m[2 * k];
    double t_up = b * psi_2k - corner_bound(M);
    double t_lo = a * psi_2k + corner_bound(N);
    return {t_lo, t_up};
}

AtomicDensity atoms_from_rank(const MomentVector& m, int r) {
    // Solve A(r-1) Phi = (psi^(r..2r-1)) for the generating coefficients.
    Matrix A = hankel_A(m, r - 1);
    Vector rhs(r);
    for (int i = 0; i < r; ++i) rhs[i] = m[r + i];
    Vector phi = A.fullPivLu().solve(rhs);

    GeneratingFunction gf;
    gf.rank = r;
    gf.coeffs.assign(phi.data(), phi.data() + r);
    std::vector<double> roots = gf.roots(kRootImagTol);

    const double a = m.interval.a, b = m.interval.b;
    for (double& mu : roots) {
        if (mu < a - kRootClampTol || mu > b + kRootClampTol)
            throw std::runtime_error("minimal_atomic_measure: atom outside the interval");
        mu = std::clamp(mu, a, b);
    }

    // Vandermonde system sum_l rho_l mu_l^i = psi^(i), i = 0..r-1.
    Matrix V(r, r);
    for (int l = 0; l < r; ++l) {
        double p = 1.0;
        for (int i = 0; i < r; ++i) {
            V(i, l) = p;
            p *= roots[static_cast<size_t>(l)];
        }
    }
    Vector mom(r);
    for (int i = 0; i < r; ++i) mom[i] = m[i];
    Vector rho = V.fullPivLu().solve(mom);
    if ((V * rho - mom).norm() > 1e-8 * std::max(1.0, mom.norm()))
        throw std::runtime_error("minimal_atomic_measure: ill-conditioned atom weights");

    AtomicDensity d;
    for (int l = 0; l < r; ++l) {
        double w = rho[l];
        if (w < -1e-10 * std::max(1.0, std::abs(m[0])))
            throw std::runtime_error("minimal_atomic_measure: negative atom weight");
        d.atoms.push_back(Atom{std::max(w, 0.0), roots[static_cast<size_t>(l)]});
    }
    return d;
}

}  // namespace

AtomicDensity minimal_atomic_measure(const MomentVector& m) {
    double scale = m[0];
    if (!(scale > 0.0)) {
        bool all_zero = true;
        for (double v : m.values) all_zero = all_zero && std::abs(v) < 1e-300;
        if (all_zero) return AtomicDensity{};
        throw std::domain_error("minimal_atomic_measure: psi0 <= 0 with nonzero moments");
    }
    MomentVector mh = m;
    for (double& v : mh.values) v /= scale;
    RealizabilityVerdict v = is_realizable_full(mh, 1e-9);
    if (!v.realizable)
        throw std::domain_error("minimal_atomic_measure: moment vector not realizable (" +
                                to_string(v.failed) + ")");

    int r = hankel_rank(mh);
    if (r == 0) throw std::runtime_error("minimal_atomic_measure: rank detection failed");

    if (2 * r - 1 > mh.order) {
        // Even order with full-rank A(K): extend by the midpoint of the
        // admissible next-moment interval, then recover r atoms.
        auto [t_lo, t_up] = extension_bounds(mh);
        if (t_up < t_lo) {
            if (t_lo - t_up > 1e-9)
                throw std::runtime_error("minimal_atomic_measure: empty extension interval");
            t_up = t_lo = 0.5 * (t_lo + t_up);
        }
        mh.values.push_back(0.5 * (t_lo + t_up));
        mh.order += 1;
    }
    AtomicDensity d = atoms_from_rank(mh, r);
    for (Atom& at : d.atoms) at.weight *= scale;
    return d;
}

// ============================================================================
// Mixed generating functions (table for n <= 6)
// ============================================================================

namespace {

double safe_div(double num, double den, const char* what) {
    if (std::abs(den) < 1e-13 * std::max(1.0, std::abs(num)))
        throw DegenerateCaseError(std::string("mixed_generating_coefficients: ") + what);
    return num / den;
}

}  // namespace

GeneratingFunction mixed_generating_coefficients(Side side, const MixedMomentVector& g) {
    const int n = g.order;
    if (n < 1 || n > 6)
        throw std::invalid_argument("mixed_generating_coefficients: supported for 1 <= n <= 6");
    // Reflected half moments gamma_i = (+-1)^i psi_pm^(i), scaled for conditioning.
    double scale = g.psi0 > 0.0 ? g.psi0 : 1.0;
    auto gam = [&](int i) {
        double v = side == Side::plus ? g.plus_at(i) : g.minus_at(i);
        if (side == Side::minus && i % 2 == 1) v = -v;
        return v / scale;
    };
    const int k = (n + 1) / 2;
    GeneratingFunction gf;
    gf.rank = k;
    gf.coeffs.resize(static_cast<size_t>(k));
    const double g1 = gam(1), g2 = n >= 2 ? gam(2) : 0.0, g3 = n >= 3 ? gam(3) : 0.0;
    const double g4 = n >= 4 ? gam(4) : 0.0, g5 = n >= 5 ? gam(5) : 0.0,
                 g6 = n >= 6 ? gam(6) : 0.0;
    switch (n) {
        case 1:
            gf.coeffs[0] = 1.0;
            break;
        case 2:
            gf.coeffs[0] = safe_div(g2, g1, "vacuum half");
            break;
        case 3: {
            double den = g1 - g2;
            gf.coeffs[0] = -safe_div(g2 - g3, den, "degenerate order-3 half");
            gf.coeffs[1] = safe_div(g1 - g3, den, "degenerate order-3 half");
            break;
        }
        case 4: {
            double den = -g2 * g2 + g1 * g3;
            gf.coeffs[0] = -safe_div(-g3 * g3 + g2 * g4, den, "degenerate order-4 half");
            gf.coeffs[1] = safe_div(g1 * g4 - g2 * g3, den, "degenerate order-4 half");
            break;
        }
        case 5: {
            double den0 = g2 * g3 + g2 * g4 + g1 * (g3 - g4) - g2 * g2 - g3 * g3;
            double den12 = g1 * g4 - g2 * g4 + g2 * g2 + g3 * g3 - g3 * (g1 + g2);
            gf.coeffs[0] = safe_div(
                g3 * g4 + g3 * g5 + g2 * (g4 - g5) - g3 * g3 - g4 * g4, den0,
                "degenerate order-5 half");
            gf.coeffs[1] = safe_div(
                g1 * g4 - g2 * g3 - g1 * g5 + g2 * g4 + g3 * g5 - g4 * g4, den12,
                "degenerate order-5 half");
            gf.coeffs[2] = -safe_div(
                g2 * g4 - g1 * g5 + g2 * g5 + g3 * (g1 - g4) - g2 * g2, den12,
                "degenerate order-5 half");
            break;
        }
        case 6: {
            double den0 =
                g1 * (-g4 * g4 + g3 * g5) - g2 * g2 * g5 - g3 * g3 * g3 + 2 * g2 * g3 * g4;
            double den12 =
                g5 * g2 * g2 - 2 * g2 * g3 * g4 + g3 * g3 * g3 - g1 * g5 * g3 + g1 * g4 * g4;
            gf.coeffs[0] = safe_div(
                g2 * (-g5 * g5 + g4 * g6) - g3 * g3 * g6 - g4 * g4 * g4 + 2 * g3 * g4 * g5,
                den0, "degenerate order-6 half");
            gf.coeffs[1] = safe_div(
                g3 * g3 * g5 + (-g4 * g4 - g2 * g6) * g3 - g1 * g5 * g5 + g2 * g4 * g5 +
                    g1 * g4 * g6,
                den12, "degenerate order-6 half");
            gf.coeffs[2] = safe_div(
                g3 * g3 * g4 - g2 * g4 * g4 - g3 * (g1 * g6 + g2 * g5) + g2 * g2 * g6 +
                    g1 * g4 * g5,
                den12, "degenerate order-6 half");
            break;
        }
    }
    return gf;
}

AtomicDensity mixed_atomic_side(Side side, const MixedMomentVector& g) {
    GeneratingFunction gf = mixed_generating_coefficients(side, g);
    std::vector<double> roots = gf.roots(kRootImagTol);
    for (double& mu : roots) {
        if (mu < -kRootClampTol || mu > 1.0 + kRootClampTol)
            throw std::runtime_error("mixed_atomic_side: atom outside half interval");
        mu = std::clamp(mu, 0.0, 1.0);
        if (std::abs(mu) < 1e-12)
            throw DegenerateCaseError("mixed_atomic_side: atom at mu = 0 has no half moments");
    }
    const int r = gf.rank;
    auto gam = [&](int i) {
        double v = side == Side::plus ? g.plus_at(i) : g.minus_at(i);
        if (side == Side::minus && i % 2 == 1) v = -v;
        return v;
    };
    // Generalized Vandermonde rows j = 1..r (order-0 half moments unavailable).
    Matrix V(r, r);
    Vector rhs(r);
    for (int j = 1; j <= r; ++j) {
        for (int l = 0; l < r; ++l) V(j - 1, l) = std::pow(roots[static_cast<size_t>(l)], j);
        rhs[j - 1] = gam(j);
    }
    Vector rho = V.fullPivLu().solve(rhs);
    AtomicDensity d;
    for (int l = 0; l < r; ++l) {
        double w = rho[l];
        if (w < -1e-10 * std::max(1.0, std::abs(g.psi0)))
            throw std::runtime_error("mixed_atomic_side: negative atom weight");
        double mu = roots[static_cast<size_t>(l)];
        d.atoms.push_back(Atom{std::max(w, 0.0), side == Side::plus ? mu : -mu});
    }
    return d;
}

// ============================================================================
// Projection to the realizable set
// ============================================================================

MixedMomentVector project_to_realizable(const MixedMomentVector& g, double tol) {
    if (is_realizable_mixed(g, tol).realizable) return g;
    if (!(g.psi0 > 0.0)) {
        if (g.psi0 == 0.0) {
            MixedMomentVector zero = g;
            std::fill(zero.plus.begin(), zero.plus.end(), 0.0);
            std::fill(zero.minus.begin(), zero.minus.end(), 0.0);
            return zero;
        }
        throw std::domain_error("project_to_realizable: psi0 < 0");
    }
    MixedMomentVector eq = equilibrium_mixed(g.psi0, g.order);
    auto blend = [&](double alpha) {
        MixedMomentVector u = g;
        for (size_t i = 0; i < u.plus.size(); ++i) {
            u.plus[i] = alpha * g.plus[i] + (1.0 - alpha) * eq.plus[i];
            u.minus[i] = alpha * g.minus[i] + (1.0 - alpha) * eq.minus[i];
        }
        return u;
    };
    double lo = 0.0, hi = 1.0;  // realizable at lo (equilibrium), not at hi
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        if (is_realizable_mixed(blend(mid), tol).realizable)
            lo = mid;
        else
            hi = mid;
    }
    return blend(lo);
}

}  // namespace momentkit
