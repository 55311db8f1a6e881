#pragma once

#include "momentkit/metrics.hpp"
#include "momentkit/scenario.hpp"

namespace momentkit {

// ============================================================================
// Kinetic reference solver (finite differences in x and mu)
// ============================================================================

enum class CollisionStepping {
    automatic,      // explicit if the diffusion limit is not much stricter than CFL
    explicit_only,  // forward Euler everywhere (checks the diffusion bound)
    implicit        // Strang split with backward-Euler collision half-steps
};

struct FpOptions {
    int nx = 200;
    int nmu = 100;  // number of mu intervals; nodes include both endpoints
    double cfl = 0.9;
    int frame_count = 32;
    CollisionStepping stepping = CollisionStepping::automatic;
    long max_steps = 5000000;
};

// Vertex-centered angular grid: nodes mu_j = -1 + j * dmu carry trapezoid
// weights (half at the ends), so the discrete mass sum_j w_j psi_j matches
// the trapezoid density output and endpoint beams keep their full mass.
struct KineticState {
    std::vector<double> x;    // cell centers
    std::vector<double> mu;   // angular nodes, including -1 and 1
    std::vector<double> psi;  // psi[i * mu.size() + j]
};

struct FpRunResult {
    DensityField field;
    KineticState final_state;
    std::vector<double> anisotropy;  // per snapshot: mass-weighted mean
                                     // |psi_+^(1) - psi^(0)/4| deviation
    long steps = 0;
    double initial_mass = 0.0;
    double final_mass = 0.0;
};

class FpSolver {
  public:
    FpSolver(const Scenario& sc, const FpOptions& opt = {});

    const KineticState& state() const { return state_; }
    double time() const { return t_; }
    double dx() const { return dx_; }
    double dmu() const { return dmu_; }

    // Trapezoid mass functional of the current angular profile at cell i.
    double cell_density(int i) const;
    double mass() const;
    // Mass-weighted mean departure of the forward half-flux from its
    // equilibrium share: sum_i |psi_+^(1) - psi^(0)/4| / sum_i psi^(0).
    double anisotropy() const;

    // Stability bound of the fully explicit update (advection + diffusion).
    double max_explicit_step() const;
    // Advective bound alone (governs the Strang path).
    double max_advective_step() const;

    // Forward-Euler update; rejects dt beyond max_explicit_step().
    void explicit_step(double dt);
    // Backward-Euler collision half-steps around an explicit advection step.
    void strang_step(double dt);

    FpRunResult run();

  private:
    void advection_diffusion_rates(std::vector<double>& rate, bool include_collision) const;
    void collision_half_step_implicit(double half_dt);

    Scenario scenario_;
    FpOptions opt_;
    double dx_ = 0.0, dmu_ = 0.0, t_ = 0.0;
    KineticState state_;
    std::vector<double> w_;                      // angular trapezoid weights
    std::vector<double> sigma_, transport_, q_;  // per-cell coefficients
    std::vector<double> boundary_left_, boundary_right_;  // ghost values per node
    long steps_ = 0;
};

}  // namespace momentkit
