#include "momentkit/fv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "momentkit/realizability.hpp"

namespace momentkit {

// ============================================================================
// Interface fluxes
// ============================================================================

namespace {

Vector hll_from_evals(const Vector& ul, const Vector& ur, const ModelEval& el,
                      const ModelEval& er) {
    return 0.5 * (el.flux + er.flux) - 0.5 * (ur - ul);
}

// Half-range upwinding: plus-half moments travel right (take the left state),
// minus-half moments travel left (take the right state); the zeroth component
// combines the two half-range first moments.
Vector kinetic_from_evals(int order, const Vector& ul, const Vector& ur, const ModelEval& el,
                          const ModelEval& er) {
    const int n = order;
    Vector h(2 * n + 1);
    h[0] = ul[1] + ur[n + 1];
    for (int j = 1; j <= n; ++j) {
        h[j] = el.flux[j];
        h[n + j] = er.flux[n + j];
    }
    return h;
}

}  // namespace

Vector flux_upwind(const MomentModel& m, const Vector& ul, const Vector& ur) {
    return m.a_plus() * ul + m.a_minus() * ur;
}

Vector flux_hll(const MomentModel& m, const Vector& ul, const Vector& ur) {
    return hll_from_evals(ul, ur, m.evaluate(ul), m.evaluate(ur));
}

Vector flux_kinetic(const MomentModel& m, const Vector& ul, const Vector& ur) {
    return kinetic_from_evals(m.descriptor().mixed_order(), ul, ur, m.evaluate(ul),
                              m.evaluate(ur));
}

Vector numerical_flux(const MomentModel& m, const Vector& ul, const Vector& ur) {
    switch (m.scheme()) {
        case FluxScheme::upwind: return flux_upwind(m, ul, ur);
        case FluxScheme::hll: return flux_hll(m, ul, ur);
        case FluxScheme::kinetic: return flux_kinetic(m, ul, ur);
    }
    throw std::logic_error("unhandled flux scheme");
}

// ============================================================================
// Solver
// ============================================================================

FvSolver::FvSolver(const Scenario& sc, const ClosureModel& descriptor, const SolverOptions& opt)
    : scenario_(sc), model_(MomentModel::create(descriptor)), opt_(opt) {
    if (opt.nx < 2) throw std::invalid_argument("FvSolver: nx must be at least 2");
    const int nx = opt.nx;
    dx_ = (sc.x_max - sc.x_min) / nx;
    x_.resize(nx);
    coeffs_.resize(nx);
    states_.resize(nx);
    for (int i = 0; i < nx; ++i) {
        x_[i] = sc.x_min + (i + 0.5) * dx_;
        coeffs_[i] = CellCoefficients{sc.sigma_a(x_[i]), sc.transport(x_[i]), sc.source(x_[i])};
        states_[i] = model_->moments_of(sc.initial.at(x_[i]));
        stiffness_cap_ = std::max(stiffness_cap_, model_->stiffness_rate(coeffs_[i]));
    }
    ghost_left_ = model_->boundary_ghost(sc.left, true);
    ghost_right_ = model_->boundary_ghost(sc.right, false);
    project_all(states_);  // initial data may touch the realizable boundary
}

Vector FvSolver::interface_flux(const Vector& ul, const Vector& ur, const ModelEval& el,
                                const ModelEval& er) const {
    switch (model_->scheme()) {
        case FluxScheme::upwind: return model_->a_plus() * ul + model_->a_minus() * ur;
        case FluxScheme::hll: return hll_from_evals(ul, ur, el, er);
        case FluxScheme::kinetic:
            return kinetic_from_evals(model_->descriptor().mixed_order(), ul, ur, el, er);
    }
    throw std::logic_error("unhandled flux scheme");
}

void FvSolver::project_all(std::vector<Vector>& u) {
    for (Vector& s : u) {
        if (!s.allFinite()) throw ConvergenceError("finite-volume state became non-finite");
        if (model_->project(s)) ++log_.projected_states;
    }
}

std::vector<Vector> FvSolver::rhs(const std::vector<Vector>& u, RhsInfo* info) const {
    const int nx = opt_.nx;
    std::vector<ModelEval> evals(nx);
    for (int i = 0; i < nx; ++i) evals[i] = model_->evaluate(u[i]);
    ModelEval ghost_el{ghost_left_.flux, {}};
    ModelEval ghost_er{ghost_right_.flux, {}};

    std::vector<Vector> h(nx + 1);
    h[0] = interface_flux(ghost_left_.state, u[0], ghost_el, evals[0]);
    for (int i = 1; i < nx; ++i) h[i] = interface_flux(u[i - 1], u[i], evals[i - 1], evals[i]);
    h[nx] = interface_flux(u[nx - 1], ghost_right_.state, evals[nx - 1], ghost_er);

    std::vector<Vector> out(nx);
    double local_rate = 0.0;
    for (int i = 0; i < nx; ++i) {
        Vector loc = model_->local_terms(u[i], evals[i], coeffs_[i]);
        out[i] = (h[i] - h[i + 1]) / dx_ + loc;
        local_rate += loc[0] * dx_;
    }
    if (info) {
        info->boundary_rate = h[0][0] - h[nx][0];
        info->local_rate = local_rate;
    }
    return out;
}

double FvSolver::max_step() const {
    double dt = opt_.cfl * dx_ / model_->wave_speed();
    if (stiffness_cap_ > 0.0) dt = std::min(dt, 1.8 / stiffness_cap_);
    return dt;
}

void FvSolver::euler_step(double dt) {
    if (!(dt > 0.0) || dt > max_step() * (1.0 + 1e-12))
        throw std::invalid_argument("euler_step: dt violates the stability bound");
    std::vector<Vector> k = rhs(states_);
    for (int i = 0; i < opt_.nx; ++i) states_[i] += dt * k[i];
    project_all(states_);
    t_ += dt;
    ++log_.steps;
}

void FvSolver::set_states(std::vector<Vector> u) {
    if (static_cast<int>(u.size()) != opt_.nx)
        throw std::invalid_argument("set_states: cell count mismatch");
    for (const Vector& v : u)
        if (v.size() != model_->size())
            throw std::invalid_argument("set_states: component count mismatch");
    states_ = std::move(u);
}

double FvSolver::mass(const std::vector<Vector>& u) const {
    double m = 0.0;
    for (const Vector& s : u) m += s[0] * dx_;
    return m;
}

double FvSolver::rhs_norm() const {
    std::vector<Vector> k = rhs(states_);
    double acc = 0.0;
    for (const Vector& v : k) acc += v.cwiseAbs().sum() * dx_;
    return acc;
}

RunResult FvSolver::run() {
    const int nx = opt_.nx;
    const double t_end = scenario_.t_end;
    const double time_eps = 1e-12 * t_end;

    std::set<double> snap_set{t_end};
    for (double t : scenario_.snapshot_times) snap_set.insert(t);
    snap_set.insert(scenario_.char_time);
    for (int k = 1; k < opt_.frame_count; ++k) snap_set.insert(t_end * k / opt_.frame_count);
    std::vector<double> snaps;
    for (double t : snap_set)  // integration stops at t_end even when the
        if (t > time_eps && t <= t_end + time_eps &&  // scenario lists later marks
            (snaps.empty() || t - snaps.back() > time_eps))
            snaps.push_back(t);

    RunResult res;
    res.x = x_;
    res.field.x = x_;
    auto record = [&](double t) {
        res.field.times.push_back(t);
        std::vector<double> row(static_cast<size_t>(nx));
        for (int i = 0; i < nx; ++i) row[static_cast<size_t>(i)] = model_->density(states_[i]);
        res.field.density.push_back(std::move(row));
    };
    record(0.0);

    res.audit.initial_mass = mass(states_);
    log_.min_dt = std::numeric_limits<double>::infinity();

    // Embedded pair: ynew = y + h (2/9 k1 + 1/3 k2 + 4/9 k3) with stage times
    // (0, 1/2, 3/4); the k4 = f(ynew) evaluation feeds the error estimate
    // h (-5/72 k1 + 1/12 k2 + 1/9 k3 - 1/8 k4).
    const double b1 = 2.0 / 9.0, b2 = 1.0 / 3.0, b3 = 4.0 / 9.0;
    const double e1 = -5.0 / 72.0, e2 = 1.0 / 12.0, e3 = 1.0 / 9.0, e4 = -1.0 / 8.0;

    size_t next_snap = 0;
    double dt_work = max_step();
    std::vector<Vector> y2(nx), y3(nx), yn(nx);
    while (next_snap < snaps.size()) {
        if (log_.steps + log_.rejected > opt_.max_steps)
            throw ConvergenceError("time integration exceeded the step budget");
        double target = snaps[next_snap];
        double dt = std::min(dt_work, max_step());
        bool hit = false;
        if (t_ + dt >= target - time_eps) {
            dt = target - t_;
            hit = true;
        }
        if (!(dt > 0.0)) throw ConvergenceError("time step collapsed");

        RhsInfo i1, i2, i3;
        std::vector<Vector> k1 = rhs(states_, &i1);
        for (int i = 0; i < nx; ++i) y2[i] = states_[i] + 0.5 * dt * k1[i];
        project_all(y2);
        std::vector<Vector> k2 = rhs(y2, &i2);
        for (int i = 0; i < nx; ++i) y3[i] = states_[i] + 0.75 * dt * k2[i];
        project_all(y3);
        std::vector<Vector> k3 = rhs(y3, &i3);
        for (int i = 0; i < nx; ++i)
            yn[i] = states_[i] + dt * (b1 * k1[i] + b2 * k2[i] + b3 * k3[i]);
        project_all(yn);
        std::vector<Vector> k4 = rhs(yn);

        double err = 0.0;
        for (int i = 0; i < nx; ++i) {
            Vector e = dt * (e1 * k1[i] + e2 * k2[i] + e3 * k3[i] + e4 * k4[i]);
            for (int c = 0; c < e.size(); ++c) {
                double scale =
                    opt_.atol + opt_.rtol * std::max(std::abs(states_[i][c]), std::abs(yn[i][c]));
                err = std::max(err, std::abs(e[c]) / scale);
            }
        }

        double factor = err > 0.0 ? std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.2, 5.0) : 5.0;
        if (err <= 1.0) {
            states_.swap(yn);
            t_ = hit ? target : t_ + dt;
            res.audit.boundary_net +=
                dt * (b1 * i1.boundary_rate + b2 * i2.boundary_rate + b3 * i3.boundary_rate);
            res.audit.local_net +=
                dt * (b1 * i1.local_rate + b2 * i2.local_rate + b3 * i3.local_rate);
            ++log_.steps;
            log_.min_dt = std::min(log_.min_dt, dt);
            log_.max_dt = std::max(log_.max_dt, dt);
            if (hit) {
                record(t_);
                ++next_snap;
            }
            if (!hit) dt_work = dt * factor;  // keep the working step across landings
        } else {
            ++log_.rejected;
            dt_work = dt * factor;
        }
    }

    res.audit.final_mass = mass(states_);
    res.final_state = states_;
    res.log = log_;
    return res;
}

}  // namespace momentkit
