#include "momentkit/models.hpp"

#include <cmath>
#include <stdexcept>

#include "momentkit/realizability.hpp"

namespace momentkit {

const Matrix& MomentModel::a_plus() const {
    throw std::logic_error("split flux matrices are only defined for spectral models");
}

const Matrix& MomentModel::a_minus() const {
    throw std::logic_error("split flux matrices are only defined for spectral models");
}

// ============================================================================
// Angular quadrature helpers
// ============================================================================

namespace {

constexpr int kCellQuadNodes = 4001;    // per-cell initial-data quadrature
constexpr int kGhostQuadNodes = 40001;  // one-time boundary quadrature

// All Legendre values P_0..P_n at mu.
void legendre_all(double mu, int n, double* p) {
    p[0] = 1.0;
    if (n >= 1) p[1] = mu;
    for (int l = 1; l < n; ++l)
        p[l + 1] = ((2.0 * l + 1.0) * mu * p[l] - l * p[l - 1]) / (l + 1.0);
}

// Legendre moments of a density over `iv` (trapezoid for the smooth part,
// exact atom contributions).
Vector legendre_moments(const AngularDensity& d, int n, Interval iv, int nodes) {
    Vector out = Vector::Zero(n + 1);
    std::vector<double> p(static_cast<size_t>(n) + 1);
    if (d.expr.has_smooth() && iv.b > iv.a) {
        double h = (iv.b - iv.a) / (nodes - 1);
        for (int i = 0; i < nodes; ++i) {
            double mu = iv.a + h * i;
            double w = (i == 0 || i == nodes - 1) ? 0.5 * h : h;
            double f = std::max(d.expr.eval_smooth(mu), 0.0);
            legendre_all(mu, n, p.data());
            for (int l = 0; l <= n; ++l) out[l] += w * f * p[l];
        }
    }
    for (const Atom& at : d.expr.atoms()) {
        double fac = atom_interval_factor(at, iv);
        if (fac == 0.0) continue;
        legendre_all(at.position, n, p.data());
        for (int l = 0; l <= n; ++l) out[l] += fac * at.weight * p[l];
    }
    return out;
}

// Raw moments int_iv d(mu) mu^j dmu, j = 0..n.
Vector raw_moments(const AngularDensity& d, int n, Interval iv, int nodes) {
    MomentVector m = d.moments(n, iv, nodes);
    Vector out(n + 1);
    for (int j = 0; j <= n; ++j) out[j] = m[j];
    return out;
}

// Raw moments of a constant density over `iv` (closed form).
Vector constant_moments(double c, int n, Interval iv) {
    Vector out(n + 1);
    for (int j = 0; j <= n; ++j)
        out[j] = c * (std::pow(iv.b, j + 1) - std::pow(iv.a, j + 1)) / (j + 1.0);
    return out;
}

Interval incoming_half(bool left_side) {
    return left_side ? Interval{0.0, 1.0} : Interval{-1.0, 0.0};
}

Interval outgoing_half(bool left_side) {
    return left_side ? Interval{-1.0, 0.0} : Interval{0.0, 1.0};
}

// ============================================================================
// Spectral models (pn)
// ============================================================================

class PnModel final : public MomentModel {
  public:
    explicit PnModel(ClosureModel d) : MomentModel(std::move(d)) {
        const int n = descriptor_.order;
        a_.setZero(n + 1, n + 1);
        for (int l = 0; l < n; ++l) {
            a_(l, l + 1) = (l + 1.0) / (2.0 * l + 1.0);
            a_(l + 1, l) = (l + 1.0) / (2.0 * l + 3.0);
        }
        // Similarity scaling with D = diag(sqrt(2l+1)) makes A symmetric, so
        // |A| = D^-1 Q |Lambda| Q^T D with an orthogonal eigenbasis Q.
        Vector scale(n + 1);
        for (int l = 0; l <= n; ++l) scale[l] = std::sqrt(2.0 * l + 1.0);
        Matrix sym = scale.asDiagonal() * a_ * scale.cwiseInverse().asDiagonal();
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sym + sym.transpose()));
        Matrix abs_sym = es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() *
                         es.eigenvectors().transpose();
        Matrix abs_a = scale.cwiseInverse().asDiagonal() * abs_sym * scale.asDiagonal();
        a_plus_ = 0.5 * (a_ + abs_a);
        a_minus_ = 0.5 * (a_ - abs_a);
    }

    FluxScheme scheme() const override { return FluxScheme::upwind; }

    ModelEval evaluate(const Vector& u) const override { return ModelEval{a_ * u, {}}; }

    Vector local_terms(const Vector& u, const ModelEval&,
                       const CellCoefficients& c) const override {
        Vector out(size());
        for (int l = 0; l < size(); ++l)
            out[l] = -(c.sigma_a + 0.5 * c.transport * l * (l + 1.0)) * u[l];
        out[0] += 2.0 * c.source;
        return out;
    }

    double stiffness_rate(const CellCoefficients& c) const override {
        const int n = descriptor_.order;
        return c.sigma_a + 0.5 * c.transport * n * (n + 1.0);
    }

    Vector moments_of(const AngularDensity& d) const override {
        return legendre_moments(d, descriptor_.order, Interval{-1.0, 1.0}, kCellQuadNodes);
    }

    GhostData boundary_ghost(const BoundaryData& b, bool left_side) const override {
        const int n = descriptor_.order;
        Vector state =
            legendre_moments(b.inflow, n, incoming_half(left_side), kGhostQuadNodes) +
            legendre_moments(AngularDensity::constant(b.outgoing), n, outgoing_half(left_side),
                             kGhostQuadNodes);
        return GhostData{state, a_ * state};
    }

    const Matrix& a_plus() const override { return a_plus_; }
    const Matrix& a_minus() const override { return a_minus_; }

  private:
    Matrix a_, a_plus_, a_minus_;
};

// ============================================================================
// Full-moment two-field models (m1, k1)
// ============================================================================

class FullMomentModel final : public MomentModel {
  public:
    explicit FullMomentModel(ClosureModel d) : MomentModel(std::move(d)) {}

    FluxScheme scheme() const override { return FluxScheme::hll; }

    ModelEval evaluate(const Vector& u) const override {
        double psi0 = u[0], psi1 = u[1];
        double chi = 1.0 / 3.0;
        if (psi0 > 0.0) {
            double phi = std::clamp(psi1 / psi0, -(1.0 - kEdgeEps), 1.0 - kEdgeEps);
            chi = descriptor_.kind == ClosureKind::k1 ? k1_closure(phi) : m1_closure(phi);
        }
        Vector f(2);
        f << psi1, chi * psi0;
        return ModelEval{f, {}};
    }

    Vector local_terms(const Vector& u, const ModelEval&,
                       const CellCoefficients& c) const override {
        Vector out(2);
        out[0] = 2.0 * c.source - c.sigma_a * u[0];
        out[1] = -(c.sigma_a + c.transport) * u[1];
        return out;
    }

    double stiffness_rate(const CellCoefficients& c) const override {
        return c.sigma_a + c.transport;
    }

    Vector moments_of(const AngularDensity& d) const override {
        return raw_moments(d, 1, Interval{-1.0, 1.0}, kCellQuadNodes);
    }

    GhostData boundary_ghost(const BoundaryData& b, bool left_side) const override {
        Vector m = raw_moments(b.inflow, 2, incoming_half(left_side), kGhostQuadNodes) +
                   constant_moments(b.outgoing, 2, outgoing_half(left_side));
        return GhostData{m.head(2), m.tail(2)};
    }

    bool project(Vector& u) const override {
        if (!(u[0] > 0.0)) {
            if (u[1] == 0.0) return false;
            u[1] = 0.0;
            return true;
        }
        double cap = (1.0 - kEdgeEps) * u[0];
        if (std::abs(u[1]) <= cap) return false;
        u[1] = std::copysign(cap, u[1]);
        return true;
    }

  private:
    static constexpr double kEdgeEps = 1e-9;
};

// ============================================================================
// Mixed half-range models (mm1, mk1, mk2, mpn)
// ============================================================================

class MixedModel final : public MomentModel {
  public:
    explicit MixedModel(ClosureModel d) : MomentModel(std::move(d)) {}

    FluxScheme scheme() const override { return FluxScheme::kinetic; }

    ModelEval evaluate(const Vector& u) const override {
        const int n = order();
        MixedMomentVector g = MixedMomentVector::from_state(u, n);
        double top_plus = 0.0, top_minus = 0.0;
        AnsatzTrace trace;
        switch (descriptor_.kind) {
            case ClosureKind::mm1: {
                Mm1Closure c = mm1_closure(g);
                top_plus = c.psi2_plus;
                top_minus = c.psi2_minus;
                trace = AnsatzTrace{c.psi_at_zero, c.psi0_plus, c.psi0_minus};
                break;
            }
            case ClosureKind::mk1: {
                NormalizedMixedMoments nm = normalize(g);
                auto [p2, m2] = mk1_closure(nm.phi_plus[0], nm.phi_minus[0]);
                top_plus = p2 * g.psi0;
                top_minus = m2 * g.psi0;
                trace = polynomial_trace(g);
                break;
            }
            case ClosureKind::mk2: {
                auto [p3, m3] = mk2_closure(normalize(g));
                top_plus = p3 * g.psi0;
                top_minus = m3 * g.psi0;
                trace = polynomial_trace(g);
                break;
            }
            case ClosureKind::mpn: {
                MpnClosure c = mpn_closure(g);
                top_plus = c.psi_next_plus;
                top_minus = c.psi_next_minus;
                trace = AnsatzTrace{c.psi_at_zero, c.psi0_plus, c.psi0_minus};
                break;
            }
            default:
                throw std::logic_error("not a mixed-moment closure");
        }
        Vector f(size());
        f[0] = g.plus_at(1) + g.minus_at(1);
        for (int j = 1; j < n; ++j) {
            f[j] = g.plus_at(j + 1);
            f[n + j] = g.minus_at(j + 1);
        }
        f[n] = top_plus;
        f[2 * n] = top_minus;
        return ModelEval{f, trace};
    }

    Vector local_terms(const Vector& u, const ModelEval& ev,
                       const CellCoefficients& c) const override {
        const int n = order();
        MixedMomentVector g = MixedMomentVector::from_state(u, n);
        std::vector<double> lb = laplace_beltrami_moments(g, ev.trace, c.transport);
        Vector out = Eigen::Map<const Vector>(lb.data(), static_cast<Eigen::Index>(lb.size()));
        out -= c.sigma_a * u;
        out[0] += 2.0 * c.source;
        for (int j = 1; j <= n; ++j) {
            out[j] += c.source / (j + 1.0);
            out[n + j] += c.source * (j % 2 == 0 ? 1.0 : -1.0) / (j + 1.0);
        }
        return out;
    }

    double stiffness_rate(const CellCoefficients& c) const override {
        const int n = order();
        return c.sigma_a + 0.5 * c.transport * n * (n + 1.0);
    }

    Vector moments_of(const AngularDensity& d) const override {
        return d.mixed_moments(order(), kCellQuadNodes).to_state();
    }

    GhostData boundary_ghost(const BoundaryData& b, bool left_side) const override {
        const int n = order();
        Vector m_in = raw_moments(b.inflow, n + 1, incoming_half(left_side), kGhostQuadNodes);
        Vector m_out = constant_moments(b.outgoing, n + 1, outgoing_half(left_side));
        const Vector& plus = left_side ? m_in : m_out;
        const Vector& minus = left_side ? m_out : m_in;
        GhostData gd;
        gd.state.resize(size());
        gd.flux.resize(size());
        gd.state[0] = plus[0] + minus[0];
        gd.flux[0] = plus[1] + minus[1];
        for (int j = 1; j <= n; ++j) {
            gd.state[j] = plus[j];
            gd.state[n + j] = minus[j];
            gd.flux[j] = plus[j + 1];
            gd.flux[n + j] = minus[j + 1];
        }
        return gd;
    }

    bool project(Vector& u) const override {
        if (descriptor_.kind == ClosureKind::mpn) return false;  // globally evaluable
        if (!(u[0] > 0.0)) return false;
        const int n = order();
        MixedMomentVector g = MixedMomentVector::from_state(u, n);
        bool changed = false;

        MixedMomentVector unit = g;
        double inv = 1.0 / g.psi0;
        unit.psi0 = 1.0;
        for (double& v : unit.plus) v *= inv;
        for (double& v : unit.minus) v *= inv;
        RealizabilityVerdict verdict = is_realizable_mixed(unit, 1e-12);
        if (!verdict.realizable && verdict.margin < -1e-12) {
            g = project_to_realizable(g, 1e-12);
            changed = true;
        }

        // Strict-interior floor: beam-like states on the realizable boundary
        // are blended minimally toward equilibrium so every closure solve
        // stays well posed. The blend keeps psi0 and realizability.
        constexpr double eps = 1e-11;
        const double psi0 = g.psi0;
        auto blend_for = [&](double cur, double eq) {
            double target = eps * psi0;
            return cur >= target ? 0.0 : (target - cur) / (eq - cur);
        };
        double p1 = g.plus_at(1), m1 = g.minus_at(1);
        double r = std::max({blend_for(p1, 0.25 * psi0), blend_for(-m1, 0.25 * psi0),
                             blend_for(psi0 - (p1 - m1), 0.5 * psi0)});
        if (r > 0.0) {
            MixedMomentVector eq = equilibrium_mixed(psi0, n);
            for (int j = 0; j < n; ++j) {
                g.plus[j] = (1.0 - r) * g.plus[j] + r * eq.plus[j];
                g.minus[j] = (1.0 - r) * g.minus[j] + r * eq.minus[j];
            }
            changed = true;
        }
        if (changed) u = g.to_state();
        return changed;
    }

  private:
    int order() const { return descriptor_.mixed_order(); }

    // Reconstruction trace for the relaxation operator of the closed-form
    // models: the polynomial ansatz matching the same moments.
    AnsatzTrace polynomial_trace(const MixedMomentVector& g) const {
        MpnClosure c = mpn_closure(g);
        return AnsatzTrace{c.psi_at_zero, c.psi0_plus, c.psi0_minus};
    }
};

}  // namespace

std::unique_ptr<MomentModel> MomentModel::create(const ClosureModel& d) {
    switch (d.kind) {
        case ClosureKind::pn:
            return std::make_unique<PnModel>(d);
        case ClosureKind::m1:
        case ClosureKind::k1:
            return std::make_unique<FullMomentModel>(d);
        case ClosureKind::mm1:
        case ClosureKind::mk1:
        case ClosureKind::mk2:
        case ClosureKind::mpn:
            return std::make_unique<MixedModel>(d);
    }
    throw std::logic_error("unhandled closure kind");
}

}  // namespace momentkit
