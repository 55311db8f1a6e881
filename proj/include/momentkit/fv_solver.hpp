#pragma once

#include <memory>

#include "momentkit/metrics.hpp"
#include "momentkit/models.hpp"

namespace momentkit {

// ============================================================================
// Finite-volume moment solver
// ============================================================================

struct SolverOptions {
    int nx = 200;
    double cfl = 0.9;      // advective step fraction
    double atol = 1e-8;    // embedded-pair absolute tolerance
    double rtol = 1e-6;    // embedded-pair relative tolerance
    int frame_count = 32;  // uniform snapshots merged with scenario times
    long max_steps = 2000000;
};

struct MassAudit {
    double initial_mass = 0.0;
    double final_mass = 0.0;
    double boundary_net = 0.0;  // time-integrated net mass influx through both ends
    double local_net = 0.0;     // time-integrated source minus absorption

    // Conservation defect of the discrete update; sits at roundoff because
    // the relaxation operator and the projection both preserve mass exactly.
    double drift() const { return final_mass - initial_mass - boundary_net - local_net; }
};

struct RunLog {
    long steps = 0;
    long rejected = 0;
    long projected_states = 0;
    double min_dt = 0.0;
    double max_dt = 0.0;
};

struct RunResult {
    DensityField field;
    std::vector<Vector> final_state;
    std::vector<double> x;  // cell centers
    MassAudit audit;
    RunLog log;
};

// Interface fluxes, exposed for direct verification. Each is consistent:
// flux(m, u, u) equals the physical flux of u.
Vector flux_upwind(const MomentModel& m, const Vector& ul, const Vector& ur);
Vector flux_hll(const MomentModel& m, const Vector& ul, const Vector& ur);
Vector flux_kinetic(const MomentModel& m, const Vector& ul, const Vector& ur);
Vector numerical_flux(const MomentModel& m, const Vector& ul, const Vector& ur);

class FvSolver {
  public:
    FvSolver(const Scenario& sc, const ClosureModel& descriptor, const SolverOptions& opt = {});

    const MomentModel& model() const { return *model_; }
    const Scenario& scenario() const { return scenario_; }
    double dx() const { return dx_; }
    const std::vector<double>& centers() const { return x_; }
    const std::vector<Vector>& states() const { return states_; }
    // Replace the cell states (programmatic initial data, e.g. smooth
    // profiles the piecewise scenario format cannot express).
    void set_states(std::vector<Vector> u);
    double time() const { return t_; }

    struct RhsInfo {
        double boundary_rate = 0.0;  // net mass inflow rate through both ends
        double local_rate = 0.0;     // domain-integrated source minus absorption rate
    };

    // Semidiscrete right-hand side at the given states.
    std::vector<Vector> rhs(const std::vector<Vector>& u, RhsInfo* info = nullptr) const;

    // Largest stable forward-Euler step: advective CFL plus relaxation bound.
    double max_step() const;

    // One forward-Euler step with per-cell projection; rejects dt beyond
    // max_step().
    void euler_step(double dt);

    // Adaptive embedded RK2(3) run to t_end, landing exactly on every
    // snapshot time.
    RunResult run();

    // dx * sum |du/dt| over all cells and components at the current states.
    double rhs_norm() const;

    double mass(const std::vector<Vector>& u) const;

  private:
    Vector interface_flux(const Vector& ul, const Vector& ur, const ModelEval& el,
                          const ModelEval& er) const;
    void project_all(std::vector<Vector>& u);

    Scenario scenario_;
    std::unique_ptr<MomentModel> model_;
    SolverOptions opt_;
    double dx_ = 0.0;
    double t_ = 0.0;
    std::vector<double> x_;
    std::vector<CellCoefficients> coeffs_;
    GhostData ghost_left_, ghost_right_;
    std::vector<Vector> states_;
    double stiffness_cap_ = 0.0;  // max relaxation rate over cells
    RunLog log_;
};

}  // namespace momentkit
