// ============================================================================
// Acceptance gate: one numbered check per invocation, [PASS]/[FAIL] verdicts
// ============================================================================
//
// Usage: acceptance [N]. Without an argument every check runs in sequence.
// Each check prints quantity-of-interest lines followed by a single verdict
// line; the process exits nonzero when any executed check fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "momentkit/closures.hpp"
#include "momentkit/fp_reference.hpp"
#include "momentkit/fv_solver.hpp"
#include "momentkit/metrics.hpp"
#include "momentkit/moments.hpp"
#include "momentkit/realizability.hpp"
#include "momentkit/scenario.hpp"

using namespace momentkit;

namespace {

int g_checks = 0, g_failures = 0;

bool expect(bool ok, const char* what) {
    ++g_checks;
    if (!ok) {
        ++g_failures;
        std::printf("  - FAILED: %s\n", what);
    }
    return ok;
}

RunResult run_model(const Scenario& s, const std::string& name, int nx, int frames) {
    SolverOptions opt;
    opt.nx = nx;
    opt.frame_count = frames;
    FvSolver solver(s, ClosureModel::parse(name), opt);
    return solver.run();
}

FpRunResult run_fp(const Scenario& s, int nx, int nmu, int frames) {
    FpOptions opt;
    opt.nx = nx;
    opt.nmu = nmu;
    opt.frame_count = frames;
    return FpSolver(s, opt).run();
}

// ============================================================================
// 1. Closure identities
// ============================================================================

bool criterion_1() {
    const double tol = 1e-12;
    auto near = [&](double a, double b) { return std::abs(a - b) <= tol; };

    expect(near(k1_closure(0.0), 1.0 / 3.0), "k1(0) = 1/3");
    expect(near(k1_closure(1.0), 1.0), "k1(1) = 1");
    expect(near(k1_closure(-1.0), 1.0), "k1(-1) = 1");

    auto [kp, km] = mk1_closure(0.25, -0.25);
    expect(near(kp, 1.0 / 6.0) && near(km, 1.0 / 6.0), "mk1 at equilibrium = (1/6, 1/6)");

    NormalizedMixedMoments eq2 = normalize(equilibrium_mixed(1.0, 2));
    auto [qp, qm] = mk2_closure(eq2);
    expect(near(qp, 0.125) && near(qm, -0.125), "mk2 at equilibrium = (1/8, -1/8)");

    Mm1Closure mm = mm1_closure(equilibrium_mixed(1.0, 1));
    expect(near(mm.psi2_plus, 1.0 / 6.0) && near(mm.psi2_minus, 1.0 / 6.0),
           "mm1 second moments at equilibrium = 1/6");
    expect(near(mm.psi_at_zero, 0.5), "mm1 reconstruction at mu=0 = psi0/2");
    return g_failures == 0;
}

// ============================================================================
// 2. Realizability soundness on random densities and closed vectors
// ============================================================================

AtomicDensity random_atoms(std::mt19937& rng, int count, double lo, double hi) {
    std::uniform_real_distribution<double> pos(lo, hi), wgt(0.1, 1.0);
    AtomicDensity d;
    for (int i = 0; i < count; ++i) d.atoms.push_back({wgt(rng), pos(rng)});
    return d;
}

TabulatedDensity random_tabulated(std::mt19937& rng) {
    std::uniform_real_distribution<double> val(0.01, 2.0);
    TabulatedDensity d;
    const int nodes = 31;
    for (int i = 0; i < nodes; ++i) {
        d.mu.push_back(-1.0 + 2.0 * i / (nodes - 1));
        d.values.push_back(val(rng));
    }
    return d;
}

bool criterion_2() {
    std::mt19937 rng(0x5eed);
    const double tol = 1e-9;

    int density_fails = 0;
    const int density_trials = 10000;
    for (int i = 0; i < density_trials; ++i) {
        const int order = 1 + i % 6;
        MomentVector full;
        MixedMomentVector mixed;
        if (i % 2 == 0) {
            AtomicDensity d = random_atoms(rng, 1 + (i / 2) % 3, -0.99, 0.99);
            full = moments_of_density(d, order);
            mixed = mixed_moments_of_density(d, order);
        } else {
            TabulatedDensity d = random_tabulated(rng);
            full = moments_of_density(d, order);
            mixed = mixed_moments_of_density(d, order);
        }
        if (!is_realizable_full(full, tol).realizable) ++density_fails;
        if (!is_realizable_mixed(mixed, tol).realizable) ++density_fails;
    }
    std::printf("  - density moment checks: %d trials, %d failures\n", density_trials,
                density_fails);
    expect(density_fails == 0, "all random nonnegative densities pass realizability");

    std::uniform_real_distribution<double> unit(0.005, 0.995);
    int closure_fails = 0;
    const int per_model = 2000;

    for (int i = 0; i < per_model; ++i) {  // k1 and m1: order-2 full vectors
        double phi = 2.0 * unit(rng) - 1.0;
        MomentVector k({1.0, phi, k1_closure(phi)});
        if (!is_realizable_full(k, tol).realizable) ++closure_fails;
        MomentVector m({1.0, phi, m1_closure(phi)});
        if (!is_realizable_full(m, tol).realizable) ++closure_fails;
    }

    for (int i = 0; i < per_model; ++i) {  // mk1 and mm1: order-2 mixed vectors
        double a = unit(rng), b = unit(rng);
        if (a + b > 0.99) {
            const double shrink = 0.99 / (a + b);
            a *= shrink;
            b *= shrink;
        }
        auto [p2, m2] = mk1_closure(a, -b);
        MixedMomentVector k(1.0, {a, p2}, {-b, m2});
        if (!is_realizable_mixed(k, tol).realizable) ++closure_fails;

        Mm1Closure mm = mm1_closure(MixedMomentVector(1.0, {a}, {-b}));
        MixedMomentVector m(1.0, {a, mm.psi2_plus}, {-b, mm.psi2_minus});
        if (!is_realizable_mixed(m, tol).realizable) ++closure_fails;
    }

    for (int i = 0; i < per_model; ++i) {  // mk2: order-3 extensions
        AtomicDensity d = random_atoms(rng, 2, 0.02, 0.98);
        AtomicDensity dm = random_atoms(rng, 2, -0.98, -0.02);
        d.atoms.insert(d.atoms.end(), dm.atoms.begin(), dm.atoms.end());
        TabulatedDensity bg = random_tabulated(rng);
        MixedMomentVector g = mixed_moments_of_density(d, 2);
        MixedMomentVector gb = mixed_moments_of_density(bg, 2);
        g.psi0 += gb.psi0;
        for (int j = 0; j < 2; ++j) {
            g.plus[j] += gb.plus[j];
            g.minus[j] += gb.minus[j];
        }
        auto [p3, m3] = mk2_closure(normalize(g));
        MixedMomentVector ext(g.psi0, {g.plus[0], g.plus[1], p3 * g.psi0},
                              {g.minus[0], g.minus[1], m3 * g.psi0});
        if (!is_realizable_mixed(ext, tol).realizable) ++closure_fails;
    }

    std::printf("  - closed-vector checks: %d total, %d failures\n", 5 * per_model,
                closure_fails);
    expect(closure_fails == 0, "all closed vectors pass order-(n+1) realizability");
    return g_failures == 0;
}

// ============================================================================
// 3. Atom recovery round trip
// ============================================================================

AtomicDensity planted_atoms(std::mt19937& rng, int count, double lo, double hi) {
    std::uniform_real_distribution<double> wgt(0.1, 1.0), jitter(0.0, 1.0);
    // Distinct positions with generous separation keep the companion-matrix
    // root solve far from coalescence.
    std::vector<double> pos;
    const double span = (hi - lo) / count;
    for (int i = 0; i < count; ++i)
        pos.push_back(lo + span * (i + 0.15 + 0.7 * jitter(rng)));
    AtomicDensity d;
    for (double p : pos) d.atoms.push_back({wgt(rng), p});
    return d;
}

bool match_atoms(const AtomicDensity& got, const AtomicDensity& want, double tol) {
    if (got.atoms.size() != want.atoms.size()) return false;
    auto sorted = [](AtomicDensity d) {
        std::sort(d.atoms.begin(), d.atoms.end(),
                  [](const Atom& a, const Atom& b) { return a.position < b.position; });
        return d;
    };
    AtomicDensity g = sorted(got), w = sorted(want);
    for (size_t i = 0; i < g.atoms.size(); ++i) {
        if (std::abs(g.atoms[i].position - w.atoms[i].position) > tol) return false;
        if (std::abs(g.atoms[i].weight - w.atoms[i].weight) > tol) return false;
    }
    return true;
}

bool criterion_3() {
    std::mt19937 rng(0xa70ab);
    const double tol = 1e-8;
    int full_fails = 0, mixed_fails = 0;
    const int trials = 300;

    for (int i = 0; i < trials; ++i) {
        const int r = 1 + i % 3;
        AtomicDensity d = planted_atoms(rng, r, -0.95, 0.95);
        MomentVector m = moments_of_density(d, 2 * r);
        if (!match_atoms(minimal_atomic_measure(m), d, tol)) ++full_fails;
    }
    std::printf("  - full recovery: %d trials, %d mismatches\n", trials, full_fails);
    expect(full_fails == 0, "full-moment atom recovery to 1e-8");

    for (int i = 0; i < trials; ++i) {
        const int r = 1 + i % 3;
        AtomicDensity plus = planted_atoms(rng, r, 0.05, 0.95);
        AtomicDensity minus = planted_atoms(rng, r, -0.95, -0.05);
        AtomicDensity both = plus;
        both.atoms.insert(both.atoms.end(), minus.atoms.begin(), minus.atoms.end());
        MixedMomentVector g = mixed_moments_of_density(both, 2 * r);
        if (!match_atoms(mixed_atomic_side(Side::plus, g), plus, tol)) ++mixed_fails;
        if (!match_atoms(mixed_atomic_side(Side::minus, g), minus, tol)) ++mixed_fails;
    }
    std::printf("  - per-half recovery: %d trials, %d mismatches\n", trials, mixed_fails);
    expect(mixed_fails == 0, "per-half atom recovery to 1e-8");
    return g_failures == 0;
}

// ============================================================================
// 4. Angular-diffusion moment sources against an analytic oracle
// ============================================================================

namespace poly {
// Coefficient vectors p[k] for sum_k p[k] mu^k.
std::vector<double> derivative(const std::vector<double>& p) {
    std::vector<double> d;
    for (size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * static_cast<double>(k));
    return d;
}
std::vector<double> one_minus_mu2_times(const std::vector<double>& p) {
    std::vector<double> q(p.size() + 2, 0.0);
    for (size_t k = 0; k < p.size(); ++k) {
        q[k] += p[k];
        q[k + 2] -= p[k];
    }
    return q;
}
double plus_moment(const std::vector<double>& p, int m) {
    double acc = 0.0;
    for (size_t k = 0; k < p.size(); ++k) acc += p[k] / static_cast<double>(m + k + 1);
    return acc;
}
double minus_moment(const std::vector<double>& p, int m) {
    double acc = 0.0;
    for (size_t k = 0; k < p.size(); ++k) {
        double s = ((m + static_cast<int>(k)) % 2 == 0) ? 1.0 : -1.0;
        acc += s * p[k] / static_cast<double>(m + k + 1);
    }
    return acc;
}
}  // namespace poly

bool criterion_4() {
    std::mt19937 rng(0xd1ff);
    std::uniform_real_distribution<double> small(-0.3, 0.3), base(1.5, 2.5), tt(0.5, 3.0);
    const double tol = 1e-6;
    int fails = 0;
    double worst = 0.0;
    bool zeroth_exact = true;

    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 3;
        const double T = tt(rng);
        std::vector<double> p = {base(rng), small(rng), small(rng), small(rng), small(rng)};

        MixedMomentVector g;
        g.order = n;
        g.plus.resize(n);
        g.minus.resize(n);
        g.psi0 = poly::plus_moment(p, 0) + poly::minus_moment(p, 0);
        for (int j = 1; j <= n; ++j) {
            g.plus[j - 1] = poly::plus_moment(p, j);
            g.minus[j - 1] = poly::minus_moment(p, j);
        }
        AnsatzTrace trace;
        trace.psi_at_zero = p[0];
        trace.psi0_plus = poly::plus_moment(p, 0);
        trace.psi0_minus = poly::minus_moment(p, 0);

        std::vector<double> lhs = laplace_beltrami_moments(g, trace, T);
        if (lhs[0] != 0.0) zeroth_exact = false;

        // Oracle: moments of T/2 * d/dmu[(1 - mu^2) dpsi/dmu] for the
        // polynomial psi, with exact antiderivatives per half.
        std::vector<double> flux = poly::one_minus_mu2_times(poly::derivative(p));
        std::vector<double> src = poly::derivative(flux);
        for (int j = 1; j <= n; ++j) {
            double rp = 0.5 * T * poly::plus_moment(src, j);
            double rm = 0.5 * T * poly::minus_moment(src, j);
            double ep = std::abs(lhs[static_cast<size_t>(j)] - rp);
            double em = std::abs(lhs[static_cast<size_t>(n + j)] - rm);
            worst = std::max({worst, ep, em});
            if (ep > tol * std::max(1.0, std::abs(rp))) ++fails;
            if (em > tol * std::max(1.0, std::abs(rm))) ++fails;
        }
    }
    std::printf("  - worst component deviation %.3e over 100 smooth densities\n", worst);
    expect(fails == 0, "moment sources match direct quadrature to 1e-6");
    expect(zeroth_exact, "zeroth source component identically zero");
    return g_failures == 0;
}

// ============================================================================
// 5. Two-beam benchmark orderings
// ============================================================================

bool criterion_5() {
    Scenario s = builtin_scenario("two-beams");
    FpRunResult fp = run_fp(s, 200, 100, 32);

    double mm1_char = 0.0;
    for (const char* name : {"mm1", "mk1", "mk2"}) {
        RunResult r = run_model(s, name, 200, 32);
        double l1 = space_time_error(fp.field, r.field).l1;
        std::printf("  - %s space-time L1 = %.4e\n", name, l1);
        expect(l1 <= 0.01, "mixed-model space-time L1 within 0.01 of reference");
        if (std::string(name) == "mm1")
            mm1_char = snapshot_error(fp.field, r.field, 4.0).l1;
    }
    std::printf("  - mm1 characteristic L1 at t=4: %.4e\n", mm1_char);

    for (const char* name : {"m1", "k1"}) {
        RunResult r = run_model(s, name, 200, 32);
        double e = snapshot_error(fp.field, r.field, 4.0).l1;
        std::printf("  - %s characteristic L1 at t=4: %.4e (x%.1f of mm1)\n", name, e,
                    e / std::max(mm1_char, 1e-300));
        expect(e >= 10.0 * mm1_char, "net-flux artifact: error at least 10x mm1's");
    }

    double prev = 1e300;
    for (int n : {5, 11, 21}) {
        RunResult r = run_model(s, "pn:" + std::to_string(n), 200, 32);
        double l1 = space_time_error(fp.field, r.field).l1;
        std::printf("  - pn:%d space-time L1 = %.4e\n", n, l1);
        expect(l1 < prev, "spectral errors decrease monotonically in n");
        prev = l1;
    }
    return g_failures == 0;
}

// ============================================================================
// 6. One-beam stationarity and steady-state agreement
// ============================================================================

bool criterion_6() {
    Scenario s = builtin_scenario("one-beam");
    FpRunResult fp = run_fp(s, 200, 100, 32);

    for (const char* name : {"mm1", "mk1", "mk2", "m1", "pn:7", "pn:51"}) {
        SolverOptions opt;
        opt.nx = 200;
        opt.frame_count = 32;
        FvSolver solver(s, ClosureModel::parse(name), opt);
        RunResult r = solver.run();
        const double residual = solver.rhs_norm();
        const double steady = snapshot_error(fp.field, r.field, 4.0).l1;
        std::printf("  - %-5s |du/dt|_1 at t=4: %.3e   steady L1 vs reference: %.4e\n", name,
                    residual, steady);
        expect(residual < 1e-5, "time derivative below 1e-5 by t=4");
        expect(steady <= 0.1, "steady density within relative L1 0.1 of reference");
    }
    std::printf(
        "  - note: models whose slowest characteristic field stalls (a full-moment\n"
        "    wave speed crossing zero inside the beam profile, or high-order spectral\n"
        "    waves with transit times far beyond t=4) settle only asymptotically;\n"
        "    their residuals decay smoothly but have not reached 1e-5 by t=4.\n");
    return g_failures == 0;
}

// ============================================================================
// 7. Early-time exactness while the reference stays near-isotropic
// ============================================================================

bool criterion_7() {
    Scenario s = builtin_scenario("rectangular-ic");
    const int frames = 64;
    FpRunResult fp = run_fp(s, 400, 200, frames);

    std::vector<double> gated;  // positive times with anisotropy below the gate
    for (size_t k = 0; k < fp.field.times.size(); ++k)
        if (fp.field.times[k] > 0.0 && fp.anisotropy[k] < 0.02) gated.push_back(fp.field.times[k]);
    std::printf("  - near-isotropic frames (gate 0.02): %zu\n", gated.size());
    for (double t : gated) std::printf("      t = %.6f\n", t);
    expect(!gated.empty(), "the reference stays near-isotropic for at least one frame");

    for (const char* name : {"mm1", "mk1", "mk2"}) {
        RunResult r = run_model(s, name, 400, frames);
        double worst = 0.0;
        for (double t : gated) worst = std::max(worst, snapshot_error(fp.field, r.field, t).l1);
        std::printf("  - %s worst gated L1 = %.4e\n", name, worst);
        expect(worst <= 0.01, "early-time densities within relative L1 0.01");
    }

    RunResult mp5 = run_model(s, "mpn:5", 400, frames);
    RunResult p11 = run_model(s, "pn:11", 400, frames);
    const double e_mp5 = space_time_error(fp.field, mp5.field).l1;
    const double e_p11 = space_time_error(fp.field, p11.field).l1;
    std::printf("  - mpn:5 L1 = %.4e vs pn:11 L1 = %.4e\n", e_mp5, e_p11);
    expect(e_mp5 < e_p11, "mixed spectral beats full spectral at matched variable count");
    return g_failures == 0;
}

// ============================================================================
// 8. Stiff source-beam run
// ============================================================================

bool criterion_8() {
    Scenario s = builtin_scenario("source-beam");
    FpRunResult fp = run_fp(s, 300, 100, 32);

    double e_mm1 = 0.0, e_mk1 = 0.0, e_mk2 = 0.0;
    for (const char* name : {"mm1", "mk1", "mk2"}) {
        RunResult r = run_model(s, name, 300, 32);
        const double e = snapshot_error(fp.field, r.field, 2.0).l1;
        const double mn = min_density(r.field);
        std::printf("  - %s characteristic L1 at t=2: %.4e   min density: %.3e\n", name, e, mn);
        expect(mn >= 0.0, "mixed-model densities stay nonnegative");
        if (std::string(name) == "mm1") e_mm1 = e;
        if (std::string(name) == "mk1") e_mk1 = e;
        if (std::string(name) == "mk2") e_mk2 = e;
    }
    expect(e_mk2 < e_mm1 && e_mk2 < e_mk1,
           "second-order interpolating closure beats both order-1 models at t=2");

    RunResult p21 = run_model(s, "pn:21", 300, 32);
    const double mn = min_density(p21.field);
    std::printf("  - pn:21 min density over snapshots: %.3e\n", mn);
    expect(mn < 0.0, "spectral density oscillates negative at some snapshot");
    if (mn >= 0.0)
        std::printf(
            "  - note: at this resolution the stored snapshots of pn:21 remain\n"
            "    nonnegative; the truncation oscillations stay above zero on the\n"
            "    absorbing background of this problem.\n");
    return g_failures == 0;
}

// ============================================================================
// 9. Conservation audit without absorption or sources
// ============================================================================

bool criterion_9() {
    Scenario s = builtin_scenario("rectangular-ic");  // sigma_a = 0, Q = 0
    bool clean = true;
    for (double x : {0.5, 3.5, 6.5}) clean = clean && s.sigma_a(x) == 0.0 && s.source(x) == 0.0;
    expect(clean, "audit scenario has no absorption and no source");

    for (const char* name : {"pn:3", "pn:7", "m1", "k1", "mm1", "mk1", "mk2", "mpn:3"}) {
        RunResult r = run_model(s, name, 50, 8);
        const double rel =
            std::abs(r.audit.drift()) / (s.t_end * std::max(1e-300, r.audit.initial_mass));
        std::printf("  - %-5s drift per unit time (relative): %.3e\n", name, rel);
        expect(rel <= 1e-10, "mass drift per unit time within 1e-10");
    }
    return g_failures == 0;
}

// ============================================================================
// 10. First-order convergence on a smooth advection profile
// ============================================================================

bool criterion_10() {
    // Pure advection: no absorption, relaxation, or source. A right-going
    // characteristic profile (density, flux) = G(x) (1, 1/sqrt(3)) advects
    // rigidly at speed 1/sqrt(3) under the order-1 spectral system.
    Scenario s;
    s.name = "advection";
    s.x_min = 0.0;
    s.x_max = 1.0;
    s.t_end = 0.25;
    s.char_time = 0.25;
    s.initial.fallback = AngularDensity::constant(0.0);
    s.left.inflow = AngularDensity::constant(0.0);
    s.right.inflow = AngularDensity::constant(0.0);

    const double lam = 1.0 / std::sqrt(3.0);
    const double x0 = 0.35, width = 0.1;
    auto gauss = [&](double x) { return std::exp(-0.5 * (x - x0) * (x - x0) / (width * width)); };

    auto error_at = [&](int nx) {
        SolverOptions opt;
        opt.nx = nx;
        opt.frame_count = 2;
        FvSolver solver(s, ClosureModel::parse("pn:1"), opt);
        std::vector<Vector> init(nx, Vector::Zero(2));
        for (int i = 0; i < nx; ++i) {
            const double g = gauss(solver.centers()[i]);
            init[i][0] = g;
            init[i][1] = lam * g;
        }
        solver.set_states(init);
        RunResult r = solver.run();
        double num = 0.0, den = 0.0;
        for (int i = 0; i < nx; ++i) {
            const double exact = gauss(r.x[i] - lam * s.t_end);
            num += std::abs(r.field.density.back()[i] - exact);
            den += std::abs(exact);
        }
        return num / den;
    };

    const double e100 = error_at(100), e200 = error_at(200), e400 = error_at(400);
    const double p1 = std::log2(e100 / e200), p2 = std::log2(e200 / e400);
    std::printf("  - L1 errors: %.4e (nx=100)  %.4e (nx=200)  %.4e (nx=400)\n", e100, e200,
                e400);
    std::printf("  - observed orders: %.3f, %.3f\n", p1, p2);
    expect(p1 >= 0.9 && p2 >= 0.9, "upwind convergence order at least 0.9 in L1");
    return g_failures == 0;
}

// ============================================================================
// Driver
// ============================================================================

struct Entry {
    int number;
    const char* title;
    bool (*fn)();
};

const Entry kEntries[] = {
    {1, "closure identities", criterion_1},
    {2, "realizability soundness", criterion_2},
    {3, "atom recovery round trip", criterion_3},
    {4, "angular-diffusion moment sources", criterion_4},
    {5, "two-beam benchmark orderings", criterion_5},
    {6, "one-beam stationarity", criterion_6},
    {7, "early-time exactness and mixed spectral ordering", criterion_7},
    {8, "stiff source-beam orderings", criterion_8},
    {9, "conservation audit", criterion_9},
    {10, "first-order convergence", criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    int overall_failures = 0;
    for (const Entry& e : kEntries) {
        if (only != 0 && e.number != only) continue;
        g_checks = 0;
        g_failures = 0;
        std::printf("criterion %d: %s\n", e.number, e.title);
        bool ok = false;
        try {
            ok = e.fn();
        } catch (const std::exception& ex) {
            std::printf("  - exception: %s\n", ex.what());
        }
        std::printf("[%s] criterion %d: %s (%d checks, %d failed)\n", ok ? "PASS" : "FAIL",
                    e.number, e.title, g_checks, g_failures);
        if (!ok) ++overall_failures;
    }
    return overall_failures == 0 ? 0 : 1;
}
