#pragma once

#include <memory>

#include "momentkit/closures.hpp"
#include "momentkit/scenario.hpp"

namespace momentkit {

// ============================================================================
// Moment-system binding of a closure: state layout, fluxes, relaxation
// ============================================================================

// How interface fluxes are assembled for a model family.
enum class FluxScheme { upwind, hll, kinetic };

struct CellCoefficients {
    double sigma_a = 0.0;    // absorption
    double transport = 0.0;  // angular relaxation strength
    double source = 0.0;     // isotropic source magnitude
};

// Heavy per-state work (closure solves) shared between the flux assembly and
// the relaxation operator of the same state.
struct ModelEval {
    Vector flux;        // physical flux f(u)
    AnsatzTrace trace;  // reconstruction data consumed by the relaxation terms
};

// Precomputed boundary information. The flux holds the exact physical flux
// moments of the prescribed boundary density, so no closure is ever evaluated
// on boundary data.
struct GhostData {
    Vector state;
    Vector flux;
};

class MomentModel {
  public:
    static std::unique_ptr<MomentModel> create(const ClosureModel& descriptor);
    virtual ~MomentModel() = default;

    const ClosureModel& descriptor() const { return descriptor_; }
    int size() const { return descriptor_.state_size(); }
    double wave_speed() const { return 1.0; }  // all transport speeds lie in [-1, 1]
    virtual FluxScheme scheme() const = 0;

    virtual ModelEval evaluate(const Vector& u) const = 0;
    Vector flux(const Vector& u) const { return evaluate(u).flux; }

    // Relaxation + absorption + isotropic source. Component 0 carries only
    // source - absorption: the relaxation operator conserves mass.
    virtual Vector local_terms(const Vector& u, const ModelEval& ev,
                               const CellCoefficients& c) const = 0;
    // Spectral bound of the local terms, used for explicit step control.
    virtual double stiffness_rate(const CellCoefficients& c) const = 0;

    // State moments of a prescribed angular density.
    virtual Vector moments_of(const AngularDensity& d) const = 0;
    virtual GhostData boundary_ghost(const BoundaryData& b, bool left_side) const = 0;

    virtual double density(const Vector& u) const { return u[0]; }

    // Pull a state back into the set where the closure is defined, keeping
    // component 0 unchanged. Returns true when the state was adjusted.
    virtual bool project(Vector& u) const {
        (void)u;
        return false;
    }

    // Split-matrix accessors for the upwind scheme (spectral models only).
    virtual const Matrix& a_plus() const;
    virtual const Matrix& a_minus() const;

  protected:
    explicit MomentModel(ClosureModel d) : descriptor_(std::move(d)) {}

    ClosureModel descriptor_;
};

}  // namespace momentkit
