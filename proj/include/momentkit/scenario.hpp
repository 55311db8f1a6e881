#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "momentkit/moments.hpp"

namespace momentkit {

// Thrown on malformed scenario files/expressions, with line information.
struct ScenarioParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ============================================================================
// Angular densities from a closed expression grammar
// ============================================================================

// Expression over mu built from numbers, mu, + - * / ^ (integer powers),
// exp(...), and point masses dirac(mu0). Dirac terms must occur additively
// with constant weights: w * dirac(c). The smooth remainder is kept as an
// evaluable tree.
class AngularExpr {
  public:
    AngularExpr() = default;
    static AngularExpr parse(const std::string& text);

    double eval_smooth(double mu) const;
    const std::vector<Atom>& atoms() const { return atoms_; }
    bool has_smooth() const { return smooth_ != nullptr; }
    const std::string& text() const { return text_; }

    struct Node;

  private:
    std::shared_ptr<const Node> smooth_;
    std::vector<Atom> atoms_;
    std::string text_;
};

// Angular density given by an expression; moments combine a dense trapezoid
// quadrature of the smooth part with exact atom contributions.
struct AngularDensity {
    AngularExpr expr;

    static AngularDensity constant(double value);
    static AngularDensity from_text(const std::string& text);

    double smooth_at(double mu) const { return expr.has_smooth() ? expr.eval_smooth(mu) : 0.0; }
    MomentVector moments(int n, Interval iv = {}, int quad_nodes = 4001) const;
    MixedMomentVector mixed_moments(int n, int quad_nodes = 4001) const;
};

// ============================================================================
// Transport scenarios
// ============================================================================

// Piecewise-constant spatial coefficient: the last matching closed interval
// wins, `fallback` applies outside all pieces.
struct PiecewiseCoefficient {
    struct Piece {
        double lo = 0.0, hi = 0.0, value = 0.0;
    };
    double fallback = 0.0;
    std::vector<Piece> pieces;

    double operator()(double x) const;
};

// Kinetic boundary data: a prescribed inflow density on the incoming half
// angle and a constant background on the outgoing half.
struct BoundaryData {
    AngularDensity inflow;
    double outgoing = 0.0;
};

// Initial kinetic density: piecewise in x with a fallback angular density.
struct InitialData {
    struct Piece {
        double lo = 0.0, hi = 0.0;
        AngularDensity density;
    };
    AngularDensity fallback;
    std::vector<Piece> pieces;

    const AngularDensity& at(double x) const;
};

struct Scenario {
    std::string name;
    double x_min = 0.0, x_max = 1.0;
    double t_end = 1.0;
    double char_time = 1.0;              // table evaluation time
    std::vector<double> snapshot_times;  // reported snapshot instants

    PiecewiseCoefficient sigma_a;    // absorption
    PiecewiseCoefficient transport;  // angular diffusion strength T
    PiecewiseCoefficient source;     // isotropic source Q

    InitialData initial;
    BoundaryData left, right;
};

// Builtin problems: "one-beam", "two-beams", "rectangular-ic", "source-beam".
Scenario builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

// Flat key-value text format with [sections] per coefficient.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
std::string serialize_scenario(const Scenario& s);

}  // namespace momentkit
