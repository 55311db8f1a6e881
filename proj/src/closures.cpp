#include "momentkit/closures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace momentkit {

// ============================================================================
// Model descriptors
// ============================================================================

ClosureModel ClosureModel::parse(const std::string& name) {
    ClosureModel m;
    auto parse_order = [&](const std::string& s, size_t prefix_len) {
        size_t pos = 0;
        int n = 0;
        try {
            n = std::stoi(s.substr(prefix_len), &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("unknown model name: " + s);
        }
        if (pos != s.size() - prefix_len || n < 1)
            throw std::invalid_argument("unknown model name: " + s);
        return n;
    };
    if (name.rfind("pn:", 0) == 0) {
        m.kind = ClosureKind::pn;
        m.order = parse_order(name, 3);
    } else if (name.rfind("mpn:", 0) == 0) {
        m.kind = ClosureKind::mpn;
        m.order = parse_order(name, 4);
    } else if (name == "m1") {
        m.kind = ClosureKind::m1;
        m.order = 1;
    } else if (name == "k1") {
        m.kind = ClosureKind::k1;
        m.order = 1;
    } else if (name == "mm1") {
        m.kind = ClosureKind::mm1;
        m.order = 1;
    } else if (name == "mk1") {
        m.kind = ClosureKind::mk1;
        m.order = 1;
    } else if (name == "mk2") {
        m.kind = ClosureKind::mk2;
        m.order = 2;
    } else {
        throw std::invalid_argument("unknown model name: " + name);
    }
    return m;
}

std::string ClosureModel::name() const {
    switch (kind) {
        case ClosureKind::pn: return "pn:" + std::to_string(order);
        case ClosureKind::mpn: return "mpn:" + std::to_string(order);
        case ClosureKind::m1: return "m1";
        case ClosureKind::k1: return "k1";
        case ClosureKind::mm1: return "mm1";
        case ClosureKind::mk1: return "mk1";
        case ClosureKind::mk2: return "mk2";
    }
    return "?";
}

int ClosureModel::state_size() const {
    switch (kind) {
        case ClosureKind::pn: return order + 1;
        case ClosureKind::m1:
        case ClosureKind::k1: return 2;
        case ClosureKind::mm1:
        case ClosureKind::mk1: return 3;
        case ClosureKind::mk2: return 5;
        case ClosureKind::mpn: return 2 * order + 1;
    }
    return 0;
}

bool ClosureModel::is_mixed() const {
    return kind == ClosureKind::mm1 || kind == ClosureKind::mk1 || kind == ClosureKind::mk2 ||
           kind == ClosureKind::mpn;
}

int ClosureModel::mixed_order() const {
    switch (kind) {
        case ClosureKind::mm1:
        case ClosureKind::mk1: return 1;
        case ClosureKind::mk2: return 2;
        case ClosureKind::mpn: return order;
        default: throw std::logic_error("mixed_order: not a mixed model");
    }
}

double wave_speed_bound(const ClosureModel&) { return 1.0; }

// ============================================================================
// Legendre system
// ============================================================================

PnSystem pn_system(int n, double sigma_a, double T) {
    if (n < 1) throw std::invalid_argument("pn_system: n < 1");
    PnSystem sys;
    sys.flux = Matrix::Zero(n + 1, n + 1);
    sys.reaction = Vector::Zero(n + 1);
    for (int l = 0; l <= n; ++l) {
        if (l + 1 <= n) sys.flux(l, l + 1) = (l + 1.0) / (2.0 * l + 1.0);
        if (l - 1 >= 0) sys.flux(l, l - 1) = l / (2.0 * l + 1.0);
        sys.reaction[l] = -sigma_a - 0.5 * T * l * (l + 1.0);
    }
    return sys;
}

// ============================================================================
// Scalar solvers
// ============================================================================

namespace {

// Bracketed Newton for a strictly increasing f: solve f(x) = target. The
// residual test runs before the next iterate is formed so the point it
// validated is the point returned; in double precision f is locally constant,
// so an exact-zero residual is common and must short-circuit here rather than
// fall through to the bisection fallback (x sits on the just-updated bracket
// edge there, and the fallback would discard the converged value).
template <class F, class DF>
double newton_increasing(F f, DF df, double target, double x0, double lo, double hi, double tol,
                         int max_iter, const char* what) {
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < max_iter; ++it) {
        double fx = f(x) - target;
        if (std::abs(fx) <= tol * std::max(1.0, std::abs(target))) return x;
        if (fx > 0.0)
            hi = std::min(hi, x);
        else
            lo = std::max(lo, x);
        double d = df(x);
        double xn = (d > 0.0) ? x - fx / d : x;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection fallback
        if (std::abs(xn - x) <= tol * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    throw ConvergenceError(std::string(what) + ": no convergence");
}

}  // namespace

double k1_closure(double phi1) {
    if (std::abs(phi1) > 1.0 + 1e-12) throw std::domain_error("k1_closure: |phi1| > 1");
    phi1 = std::clamp(phi1, -1.0, 1.0);
    return (2.0 * phi1 * phi1 + 1.0) / 3.0;
}

namespace {

// Langevin function coth(beta) - 1/beta and its derivative.
double langevin(double b) {
    double ab = std::abs(b);
    if (ab < 1e-4) return b / 3.0 - b * b * b / 45.0 + 2.0 * std::pow(b, 5) / 945.0;
    if (ab > 350.0) return (b > 0 ? 1.0 : -1.0) - 1.0 / b;
    return 1.0 / std::tanh(b) - 1.0 / b;
}

double langevin_deriv(double b) {
    double ab = std::abs(b);
    if (ab < 1e-4) return 1.0 / 3.0 - b * b / 15.0 + 2.0 * std::pow(b, 4) / 189.0;
    if (ab > 350.0) return 1.0 / (b * b);
    double s = std::sinh(b);
    return 1.0 / (b * b) - 1.0 / (s * s);
}

}  // namespace

double m1_dual_beta(double phi1, const NewtonOptions& opt) {
    if (std::abs(phi1) >= 1.0) throw std::domain_error("m1_dual_beta: |phi1| >= 1");
    if (phi1 == 0.0) return 0.0;
    double p = std::abs(phi1);
    // Standard inverse-Langevin starting guess, exact as p -> 0 and p -> 1.
    double x0 = p * (3.0 - p * p) / (1.0 - p * p);
    double hi = 2.0 / (1.0 - p);  // L(hi) > p since L(b) > 1 - 1/b for b > 0
    double b = newton_increasing(langevin, langevin_deriv, p, x0, 0.0, hi, opt.tol, opt.max_iter,
                                 "m1_dual_beta");
    return phi1 > 0 ? b : -b;
}

double m1_closure(double phi1, const NewtonOptions& opt) {
    double b = m1_dual_beta(phi1, opt);
    if (std::abs(b) < 1e-4) return 1.0 / 3.0 + 2.0 * b * b / 45.0 - 4.0 * std::pow(b, 4) / 945.0;
    return 1.0 - 2.0 * phi1 / b;
}

// ============================================================================
// Exponential half-interval integrals I_n(b) = int_0^1 mu^n e^(b mu) dmu
// ============================================================================

namespace {

// 6th-order Taylor branch below |b| = 1e-4: I_n = sum_k b^k / (k! (k+n+1)).
double exp_int_series(int n, double b) {
    double term = 1.0, acc = 0.0;
    for (int k = 0; k <= 6; ++k) {
        acc += term / (k + n + 1.0);
        term *= b / (k + 1.0);
    }
    return acc;
}

// Mean of mu under e^(b mu) on [0,1]: I1/I0 = (b - 1 + e^-b) / (b (1 - e^-b)),
// strictly increasing from 0 to 1.  The rearranged forms never overflow; the
// |b| > 36 branches drop e^-|b| terms that sit below double rounding.
double exp_mean(double b) {
    if (std::abs(b) < 1e-4) return exp_int_series(1, b) / exp_int_series(0, b);
    if (b < 0.0) return 1.0 - exp_mean(-b);
    if (b > 36.0) return 1.0 - 1.0 / b;
    double em = std::exp(-b);
    return (b - 1.0 + em) / (b * (1.0 - em));
}

// Second-moment ratio I2/I0 of e^(b mu) on [0,1], overflow-free like exp_mean.
double exp_ratio2(double b) {
    if (std::abs(b) < 1e-4) return exp_int_series(2, b) / exp_int_series(0, b);
    if (b > 36.0) return 1.0 - (2.0 - 2.0 / b) / b;
    if (b < -36.0) return 2.0 / (b * b);
    if (b > 0.0) {
        double em = std::exp(-b);
        return (b * b - 2.0 * b + 2.0 - 2.0 * em) / (b * b * (1.0 - em));
    }
    double c = -b, ec = std::exp(-c);
    return (2.0 - ec * (c * c + 2.0 * c + 2.0)) / (c * c * (1.0 - ec));
}

double log_exp_int0(double b) {
    if (std::abs(b) < 1e-4) return std::log(exp_int_series(0, b));
    if (b > 0.0) return b + std::log1p(-std::exp(-b)) - std::log(b);
    return std::log1p(-std::exp(b)) - std::log(-b);
}

// beta with exp_mean(beta) = tau; the clamp caps |beta| near 1e9, keeping the
// later alpha = log(mass) - log I0 round trip accurate to ~1e-7.
double inverse_exp_mean(double tau) {
    constexpr double kTauMin = 1e-9;
    tau = std::clamp(tau, kTauMin, 1.0 - kTauMin);
    if (tau >= 1.0 - 1.0 / 36.0) return 1.0 / (1.0 - tau);
    if (tau <= 1.0 / 36.0) return -1.0 / tau;
    double lo = -36.0, hi = 36.0;
    double b = 12.0 * (tau - 0.5);  // linearization around equilibrium
    for (int it = 0; it < 100; ++it) {
        double f = exp_mean(b) - tau;
        if (std::abs(f) <= 1e-15) break;
        (f > 0.0 ? hi : lo) = b;
        double mean = f + tau;
        double var = exp_ratio2(b) - mean * mean;  // > 0
        double bn = b - f / var;
        if (!(bn > lo && bn < hi)) bn = 0.5 * (lo + hi);
        if (bn == b) break;
        b = bn;
    }
    return b;
}

}  // namespace

// ============================================================================
// MM1 dual solve
// ============================================================================

// The ansatz exp(alpha + beta_pm mu) is two half-interval exponentials that
// share the value exp(alpha) at mu = 0.  Splitting the total mass as
// psi0 = m_plus + m_minus fixes each exponent through the half mean (a
// monotone scalar inversion), so the full solve reduces to one root-find in
// the split: H(m) = alpha_plus(m) - alpha_minus(m) is strictly increasing and
// changes sign on the open bracket (psi_plus_1, psi0 + psi_minus_1), which is
// nonempty exactly when the moments are strictly realizable at order 1.
EntropyDual mm1_dual_solve(const MixedMomentVector& g, const NewtonOptions& opt) {
    if (g.order < 1) throw std::invalid_argument("mm1_dual_solve: order < 1");
    const double psi0 = g.psi0, p1 = g.plus_at(1), m1 = g.minus_at(1);
    if (!(psi0 > 0.0) || !(p1 > 0.0) || !(m1 < 0.0) || !(p1 - m1 < psi0))
        throw std::domain_error("mm1_dual_solve: moments not strictly realizable at order 1");

    struct Trial {
        double alpha_plus, alpha_minus, beta_plus, beta_minus, slope;
    };
    auto eval = [&](double m) {
        double mp = m, mm = psi0 - m;
        double tau_p = p1 / mp, tau_m = -m1 / mm;
        Trial t;
        t.beta_plus = inverse_exp_mean(tau_p);
        t.beta_minus = -inverse_exp_mean(tau_m);
        t.alpha_plus = std::log(mp) - log_exp_int0(t.beta_plus);
        t.alpha_minus = std::log(mm) - log_exp_int0(-t.beta_minus);
        double var_p = std::max(exp_ratio2(t.beta_plus) - tau_p * tau_p, 1e-300);
        double var_m = std::max(exp_ratio2(-t.beta_minus) - tau_m * tau_m, 1e-300);
        t.slope = (1.0 + tau_p * tau_p / var_p) / mp + (1.0 + tau_m * tau_m / var_m) / mm;
        return t;
    };

    double lo = p1, hi = psi0 + m1;
    double m = 0.5 * (lo + hi);
    for (int it = 0; it < opt.max_iter; ++it) {
        Trial t = eval(m);
        double h = t.alpha_plus - t.alpha_minus;
        if (std::abs(h) <= 1e-12 || hi - lo <= 1e-15 * psi0) {
            EntropyDual d;
            d.alpha = 0.5 * (t.alpha_plus + t.alpha_minus);
            d.beta_plus = t.beta_plus;
            d.beta_minus = t.beta_minus;
            d.mass_plus = m;
            d.mass_minus = psi0 - m;
            return d;
        }
        (h > 0.0 ? hi : lo) = m;
        double mn = m - h / t.slope;
        if (!(mn > lo && mn < hi)) mn = 0.5 * (lo + hi);
        m = mn;
    }
    throw ConvergenceError("mm1_dual_solve: mass-split iteration did not converge");
}

Mm1Closure mm1_closure(const MixedMomentVector& g, const NewtonOptions& opt) {
    EntropyDual d = mm1_dual_solve(g, opt);
    Mm1Closure out;
    out.psi2_plus = d.mass_plus * exp_ratio2(d.beta_plus);
    out.psi2_minus = d.mass_minus * exp_ratio2(-d.beta_minus);
    out.psi_at_zero = std::exp(d.alpha);
    out.psi0_plus = d.mass_plus;
    out.psi0_minus = d.mass_minus;
    return out;
}

// ============================================================================
// MPn linear ansatz solve
// ============================================================================

namespace {

// Column order: (alpha, beta_+^(1..n), beta_-^(1..n)).
Matrix mpn_matrix(int n) {
    int sz = 2 * n + 1;
    Matrix A = Matrix::Zero(sz, sz);
    A(0, 0) = 2.0;
    for (int i = 1; i <= n; ++i) {
        A(0, i) = 1.0 / (i + 1.0);
        A(0, n + i) = (i % 2 == 0 ? 1.0 : -1.0) / (i + 1.0);
    }
    for (int j = 1; j <= n; ++j) {
        A(j, 0) = 1.0 / (j + 1.0);
        for (int i = 1; i <= n; ++i) A(j, i) = 1.0 / (i + j + 1.0);
        A(n + j, 0) = (j % 2 == 0 ? 1.0 : -1.0) / (j + 1.0);
        for (int i = 1; i <= n; ++i)
            A(n + j, n + i) = ((i + j) % 2 == 0 ? 1.0 : -1.0) / (i + j + 1.0);
    }
    return A;
}

}  // namespace

MpnCoefficients mpn_solve(const MixedMomentVector& g) {
    const int n = g.order;
    Vector rhs(2 * n + 1);
    rhs[0] = g.psi0;
    for (int j = 1; j <= n; ++j) {
        rhs[j] = g.plus_at(j);
        rhs[n + j] = g.minus_at(j);
    }
    Vector x = mpn_matrix(n).fullPivLu().solve(rhs);
    MpnCoefficients c;
    c.alpha = x[0];
    c.beta_plus.assign(x.data() + 1, x.data() + 1 + n);
    c.beta_minus.assign(x.data() + 1 + n, x.data() + 1 + 2 * n);
    return c;
}

MpnClosure mpn_closure(const MixedMomentVector& g) {
    const int n = g.order;
    MpnCoefficients c = mpn_solve(g);
    MpnClosure out;
    out.psi_at_zero = c.alpha;
    int j = n + 1;
    out.psi_next_plus = c.alpha / (j + 1.0);
    out.psi_next_minus = c.alpha * ((j % 2 == 0 ? 1.0 : -1.0) / (j + 1.0));
    out.psi0_plus = c.alpha;
    out.psi0_minus = c.alpha;
    for (int i = 1; i <= n; ++i) {
        out.psi_next_plus += c.beta_plus[static_cast<size_t>(i - 1)] / (i + j + 1.0);
        out.psi_next_minus +=
            c.beta_minus[static_cast<size_t>(i - 1)] * ((i + j) % 2 == 0 ? 1.0 : -1.0) /
            (i + j + 1.0);
        out.psi0_plus += c.beta_plus[static_cast<size_t>(i - 1)] / (i + 1.0);
        out.psi0_minus +=
            c.beta_minus[static_cast<size_t>(i - 1)] * (i % 2 == 0 ? 1.0 : -1.0) / (i + 1.0);
    }
    return out;
}

// ============================================================================
// Kershaw closures
// ============================================================================

std::pair<double, double> mk1_closure(double phi1_plus, double phi1_minus) {
    if (!(phi1_plus >= -1e-12) || !(phi1_minus <= 1e-12) ||
        !(phi1_plus - phi1_minus <= 1.0 + 1e-12))
        throw std::domain_error("mk1_closure: order-1 moments not realizable");
    double spread = phi1_plus - phi1_minus;
    double p2 = (1.0 / 3.0) * phi1_plus + (2.0 / 3.0) * phi1_plus * spread;
    double m2 = -((1.0 / 3.0) * phi1_minus + (2.0 / 3.0) * phi1_minus * spread);
    return {p2, m2};
}

namespace {

// Fraction with a vanishing-numerator short circuit: squared numerators decay
// faster than their denominators along realizable paths to the boundary, so
// the fraction's limit there is 0. Degenerate denominators (two-beam mixtures
// drive them to 0) therefore take the limit value; any noise picked up just
// off the boundary is squashed by the bracket clamp in the caller.
double guarded_frac(double num, double den) {
    if (std::abs(num) <= 1e-20) return 0.0;
    if (std::abs(den) < 1e-300) return 0.0;
    return num / den;
}

void check_mk2_input(const NormalizedMixedMoments& g) {
    if (g.order != 2) throw std::invalid_argument("mk2_closure: needs order-2 moments");
    MixedMomentVector v = denormalize(g, 1.0);
    RealizabilityVerdict verdict = is_realizable_mixed(v, 1e-9);
    if (!verdict.realizable)
        throw std::domain_error("mk2_closure: input not realizable (" +
                                to_string(verdict.failed) + ")");
}

}  // namespace

std::pair<double, double> mk2_lower_boundary(const NormalizedMixedMoments& g) {
    double p1 = g.plus_at(1), p2 = g.plus_at(2);
    double m1 = g.minus_at(1), m2 = g.minus_at(2);
    // phi_pm^(1) = 0 forces phi_pm^(2) = 0: the singularity is removable.
    double lp = std::abs(p1) < 1e-13 ? 0.0 : p2 * p2 / p1;
    double lm = std::abs(m1) < 1e-13 ? 0.0 : m2 * m2 / m1;
    return {lp, lm};
}

std::pair<double, double> mk2_upper_boundary(const NormalizedMixedMoments& g) {
    double p1 = g.plus_at(1), p2 = g.plus_at(2);
    double m1 = g.minus_at(1), m2 = g.minus_at(2);
    double shared = p2 * m1 * m1 + m2 * p1 * p1 - m2 * p2;
    double gap = m1 - p1 + 1.0;  // 1 - (phi_+^(1) - phi_-^(1)) >= 0

    double up_plus;
    {
        double inner = m2 + guarded_frac(shared, p2 * gap);
        double den = m1 - p1 - guarded_frac(m1 * m1 + m2 * m1, inner) + 1.0;
        up_plus = p2 - guarded_frac((p1 - p2) * (p1 - p2), den);
    }
    double up_minus;
    {
        double inner = p2 + guarded_frac(shared, m2 * gap);
        double den = m1 - p1 + guarded_frac(p1 * p2 - p1 * p1, inner) + 1.0;
        up_minus = guarded_frac((m1 + m2) * (m1 + m2), den) - m2;
    }

    // The third moments of any realizable extension lie between the lower
    // boundary and the per-half range bound (|phi^(3)| <= phi^(2)); on
    // degenerate two-beam mixtures the bracket collapses to a point, so
    // clamping both recovers the exact limit and bounds the cancellation
    // noise of the nested fractions near it.
    const auto [lp, lm] = mk2_lower_boundary(g);
    up_plus = std::clamp(up_plus, lp, p2);
    up_minus = std::clamp(up_minus, -m2, lm);
    return {up_plus, up_minus};
}

std::pair<double, double> mk2_closure(const NormalizedMixedMoments& g) {
    check_mk2_input(g);
    auto [lp, lm] = mk2_lower_boundary(g);
    auto [up, um] = mk2_upper_boundary(g);
    return {0.5 * (lp + up), 0.5 * (lm + um)};
}

// ============================================================================
// Angular diffusion moments
// ============================================================================

std::vector<double> laplace_beltrami_moments(const MixedMomentVector& g, const AnsatzTrace& trace,
                                             double T) {
    const int n = g.order;
    std::vector<double> s(static_cast<size_t>(2 * n + 1), 0.0);
    s[0] = 0.0;  // particle conservation: the full zeroth moment has no source
    const double half_T = 0.5 * T;
    s[1] = half_T * (trace.psi_at_zero - 2.0 * g.plus_at(1));
    s[static_cast<size_t>(n + 1)] = half_T * (-trace.psi_at_zero - 2.0 * g.minus_at(1));
    for (int m = 2; m <= n; ++m) {
        double pm2 = (m == 2) ? trace.psi0_plus : g.plus_at(m - 2);
        double mm2 = (m == 2) ? trace.psi0_minus : g.minus_at(m - 2);
        s[static_cast<size_t>(m)] = half_T * (m * (m - 1.0) * pm2 - m * (m + 1.0) * g.plus_at(m));
        s[static_cast<size_t>(n + m)] =
            half_T * (m * (m - 1.0) * mm2 - m * (m + 1.0) * g.minus_at(m));
    }
    return s;
}

}  // namespace momentkit
