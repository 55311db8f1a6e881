#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "momentkit/scenario.hpp"
#include "test_oracles.hpp"

using namespace momentkit;

// ============================================================================
// Expression grammar
// ============================================================================

TEST_CASE("expressions evaluate arithmetic over mu") {
    auto at = [](const std::string& text, double mu) {
        return AngularExpr::parse(text).eval_smooth(mu);
    };
    CHECK(at("2+3*4", 0.0) == doctest::Approx(14.0));
    CHECK(at("(2+3)*4", 0.0) == doctest::Approx(20.0));
    CHECK(at("2-3-4", 0.0) == doctest::Approx(-5.0));
    CHECK(at("12/4/3", 0.0) == doctest::Approx(1.0));
    CHECK(at("mu", 0.37) == doctest::Approx(0.37));
    CHECK(at("mu^2", -0.5) == doctest::Approx(0.25));
    CHECK(at("(1+mu)^3", 1.0) == doctest::Approx(8.0));
    CHECK(at("-mu^2", 0.5) == doctest::Approx(-0.25));  // unary minus binds the power
    CHECK(at("exp(3*mu+3)", 0.0) == doctest::Approx(std::exp(3.0)));
    CHECK(at("2^(1+1)", 0.0) == doctest::Approx(4.0));
    CHECK(at(" 1 + mu ", 0.25) == doctest::Approx(1.25));
}

TEST_CASE("dirac terms split into atoms with constant weights") {
    AngularExpr e = AngularExpr::parse("100*dirac(1)");
    REQUIRE(e.atoms().size() == 1);
    CHECK(e.atoms()[0].weight == doctest::Approx(100.0));
    CHECK(e.atoms()[0].position == doctest::Approx(1.0));
    CHECK_FALSE(e.has_smooth());

    AngularExpr mix = AngularExpr::parse("dirac(-1)/2 + 0.5 + 3*dirac(0.25)*2");
    REQUIRE(mix.atoms().size() == 2);
    CHECK(mix.atoms()[0].weight == doctest::Approx(0.5));
    CHECK(mix.atoms()[0].position == doctest::Approx(-1.0));
    CHECK(mix.atoms()[1].weight == doctest::Approx(6.0));
    CHECK(mix.atoms()[1].position == doctest::Approx(0.25));
    CHECK(mix.has_smooth());
    CHECK(mix.eval_smooth(0.9) == doctest::Approx(0.5));
}

TEST_CASE("malformed expressions raise parse errors") {
    CHECK_THROWS_AS(AngularExpr::parse(""), ScenarioParseError);
    CHECK_THROWS_AS(AngularExpr::parse("2+"), ScenarioParseError);
    CHECK_THROWS_AS(AngularExpr::parse("(1+mu"), ScenarioParseError);
    CHECK_THROWS_AS(AngularExpr::parse("1 2"), ScenarioParseError);
    CHECK_THROWS_AS(AngularExpr::parse("nu"), ScenarioParseError);
    CHECK_THROWS_AS(AngularExpr::parse("exp 3"), ScenarioParseError);
    CHECK_THROWS_AS(AngularExpr::parse("mu^mu"), ScenarioParseError);        // non-constant power
    CHECK_THROWS_AS(AngularExpr::parse("dirac(mu)"), ScenarioParseError);    // position not const
    CHECK_THROWS_AS(AngularExpr::parse("dirac(2)"), ScenarioParseError);     // outside [-1, 1]
    CHECK_THROWS_AS(AngularExpr::parse("-dirac(1)"), ScenarioParseError);    // negative weight
    CHECK_THROWS_AS(AngularExpr::parse("mu*dirac(1)"), ScenarioParseError);  // non-const scale
    CHECK_THROWS_AS(AngularExpr::parse("dirac(1)*dirac(1)"), ScenarioParseError);
    CHECK_THROWS_AS(AngularExpr::parse("1/dirac(1)"), ScenarioParseError);
}

TEST_CASE("angular densities reject negative smooth parts") {
    CHECK_THROWS_AS(AngularDensity::from_text("mu"), ScenarioParseError);
    CHECK_THROWS_AS(AngularDensity::from_text("-1"), ScenarioParseError);
    CHECK_NOTHROW(AngularDensity::from_text("mu^2"));
    CHECK_NOTHROW(AngularDensity::from_text("1+mu"));  // zero at the edge is fine
}

TEST_CASE("angular density moments combine smooth and atomic parts") {
    const AngularDensity d = AngularDensity::from_text("0.5 + 2*dirac(0.5)");
    const MomentVector m = d.moments(2);
    // Smooth: 0.5 * 2 = 1 plus atom mass 2; first moment 2 * 0.5; second
    // moment 0.5 * 2/3 + 2 * 0.25.
    CHECK(m[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(m[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m[2] == doctest::Approx(0.5 / 3.0 * 2.0 + 0.5).epsilon(1e-7));

    const MixedMomentVector g = d.mixed_moments(1);
    CHECK(g.psi0 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(g.plus_at(1) == doctest::Approx(0.25 + 1.0).epsilon(1e-7));  // smooth + atom at 0.5
    CHECK(g.minus_at(1) == doctest::Approx(-0.25).epsilon(1e-7));
}

// ============================================================================
// Piecewise coefficients and initial data
// ============================================================================

TEST_CASE("piecewise coefficients use fallback and last-match-wins") {
    PiecewiseCoefficient c;
    c.fallback = 3.0;
    c.pieces = {{0.0, 2.0, 1.0}, {1.0, 2.0, 5.0}};
    CHECK(c(-0.5) == doctest::Approx(3.0));
    CHECK(c(0.5) == doctest::Approx(1.0));
    CHECK(c(1.5) == doctest::Approx(5.0));
    CHECK(c(2.0) == doctest::Approx(5.0));  // closed intervals, later piece wins
    CHECK(c(2.5) == doctest::Approx(3.0));
}

TEST_CASE("initial data picks the last covering piece") {
    InitialData init;
    init.fallback = AngularDensity::constant(1e-4);
    init.pieces.push_back({3.0, 4.0, AngularDensity::constant(10.0)});
    CHECK(init.at(3.5).smooth_at(0.0) == doctest::Approx(10.0));
    CHECK(init.at(0.1).smooth_at(0.0) == doctest::Approx(1e-4));
    CHECK(init.at(4.2).smooth_at(0.0) == doctest::Approx(1e-4));
}

// ============================================================================
// Builtin problems
// ============================================================================

TEST_CASE("builtin catalogue exposes the four problems") {
    auto names = builtin_scenario_names();
    REQUIRE(names.size() == 4);
    for (const auto& n : names) CHECK_NOTHROW(builtin_scenario(n));
    CHECK_THROWS_AS(builtin_scenario("unknown"), std::invalid_argument);
}

TEST_CASE("builtin parameters match the published setups") {
    const Scenario ob = builtin_scenario("one-beam");
    CHECK(ob.x_min == doctest::Approx(-0.5));
    CHECK(ob.x_max == doctest::Approx(0.5));
    CHECK(ob.t_end == doctest::Approx(4.0));
    CHECK(ob.char_time == doctest::Approx(2.0));
    CHECK(ob.sigma_a(0.0) == doctest::Approx(10.0));
    CHECK(ob.sigma_a(0.3) == doctest::Approx(0.0));
    CHECK(ob.transport(0.0) == doctest::Approx(0.0));
    CHECK(ob.source(0.0) == doctest::Approx(0.0));
    // Inflow integrates to one over the full angle range.
    CHECK(ob.left.inflow.moments(0)[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ob.right.outgoing == doctest::Approx(1e-4));

    const Scenario tb = builtin_scenario("two-beams");
    CHECK(tb.sigma_a(-0.49) == doctest::Approx(4.0));
    CHECK(tb.sigma_a(0.49) == doctest::Approx(4.0));
    CHECK(tb.transport(0.0) == doctest::Approx(0.0));
    REQUIRE(tb.left.inflow.expr.atoms().size() == 1);
    CHECK(tb.left.inflow.expr.atoms()[0].weight == doctest::Approx(100.0));
    CHECK(tb.left.inflow.expr.atoms()[0].position == doctest::Approx(1.0));
    REQUIRE(tb.right.inflow.expr.atoms().size() == 1);
    CHECK(tb.right.inflow.expr.atoms()[0].position == doctest::Approx(-1.0));

    const Scenario re = builtin_scenario("rectangular-ic");
    CHECK(re.x_max == doctest::Approx(7.0));
    CHECK(re.t_end == doctest::Approx(1.5));
    CHECK(re.char_time == doctest::Approx(1.0));
    CHECK(re.transport(2.0) == doctest::Approx(1e-2));
    CHECK(re.sigma_a(2.0) == doctest::Approx(0.0));
    CHECK(re.initial.at(3.5).smooth_at(0.3) == doctest::Approx(10.0));
    CHECK(re.initial.at(2.9).smooth_at(0.3) == doctest::Approx(1e-4));

    const Scenario sb = builtin_scenario("source-beam");
    CHECK(sb.x_max == doctest::Approx(3.0));
    CHECK(sb.sigma_a(1.5) == doctest::Approx(1.0));
    CHECK(sb.sigma_a(2.5) == doctest::Approx(0.0));
    CHECK(sb.transport(0.5) == doctest::Approx(0.0));
    CHECK(sb.transport(1.5) == doctest::Approx(2.0));
    CHECK(sb.transport(2.5) == doctest::Approx(10.0));
    CHECK(sb.source(1.2) == doctest::Approx(1.0));
    CHECK(sb.source(1.7) == doctest::Approx(0.0));
    REQUIRE(sb.left.inflow.expr.atoms().size() == 1);
    CHECK(sb.left.inflow.expr.atoms()[0].weight == doctest::Approx(1.0));
}

// ============================================================================
// Text format round-trip
// ============================================================================

TEST_CASE("builtin scenarios survive a serialize-parse round-trip") {
    for (const auto& name : builtin_scenario_names()) {
        const Scenario a = builtin_scenario(name);
        const Scenario b = parse_scenario(serialize_scenario(a), name);

        CHECK(b.name == a.name);
        CHECK(b.x_min == doctest::Approx(a.x_min));
        CHECK(b.x_max == doctest::Approx(a.x_max));
        CHECK(b.t_end == doctest::Approx(a.t_end));
        CHECK(b.char_time == doctest::Approx(a.char_time));
        REQUIRE(b.snapshot_times.size() == a.snapshot_times.size());
        for (size_t i = 0; i < a.snapshot_times.size(); ++i)
            CHECK(b.snapshot_times[i] == doctest::Approx(a.snapshot_times[i]));

        for (double x : {a.x_min + 0.01, 0.5 * (a.x_min + a.x_max), a.x_max - 0.01}) {
            CHECK(b.sigma_a(x) == doctest::Approx(a.sigma_a(x)));
            CHECK(b.transport(x) == doctest::Approx(a.transport(x)));
            CHECK(b.source(x) == doctest::Approx(a.source(x)));
            const MomentVector ma = a.initial.at(x).moments(2);
            const MomentVector mb = b.initial.at(x).moments(2);
            for (int j = 0; j <= 2; ++j) CHECK(mb[j] == doctest::Approx(ma[j]).epsilon(1e-12));
        }
        for (int side = 0; side < 2; ++side) {
            const BoundaryData& ba = side == 0 ? a.left : a.right;
            const BoundaryData& bb = side == 0 ? b.left : b.right;
            CHECK(bb.outgoing == doctest::Approx(ba.outgoing));
            const MomentVector ma = ba.inflow.moments(2);
            const MomentVector mb = bb.inflow.moments(2);
            for (int j = 0; j <= 2; ++j) CHECK(mb[j] == doctest::Approx(ma[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("scenario parser reports malformed inputs with line numbers") {
    auto fails_with = [](const std::string& text, const std::string& needle) {
        try {
            parse_scenario(text, "probe");
            FAIL("expected a parse error for: " << text);
        } catch (const ScenarioParseError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    fails_with("", "domain");
    fails_with("domain = 1 0\n", "domain");
    fails_with("domain = 0 1\nt_end = -2\n", "t_end");
    fails_with("domain = 0 1\nt_end = 1\nsnapshots = 2\n", "snapshot");
    fails_with("domain = 0 1\nbogus = 3\n", "unknown key");
    fails_with("domain = 0 1\n[nowhere]\nkey = 1\n", "unknown section");
    fails_with("domain = 0 1\n[sigma_a\n", "malformed section");
    fails_with("domain = 0 1\n[sigma_a]\nfallback = -1\n", ">= 0");
    fails_with("domain = 0 1\n[sigma_a]\npiece = 1 0 2\n", "lo < hi");
    fails_with("domain = 0 1\n[initial]\nfallback = mu\n", "negative");
    fails_with("domain = 0 1\nno_equals_here\n", "key = value");
    fails_with("domain = 0 1\nt_end =\n", "empty value");
    // Line number of the offending line is included.
    fails_with("domain = 0 1\n\n[sigma_a]\npiece = bad\n", "probe:4");
}

TEST_CASE("comments and blank lines are ignored") {
    const Scenario s = parse_scenario(
        "# leading comment\n"
        "name = probe\n"
        "domain = -1 2   # trailing comment\n"
        "t_end = 3\n"
        "\n"
        "[transport]\n"
        "fallback = 0.5\n",
        "inline");
    CHECK(s.name == "probe");
    CHECK(s.x_min == doctest::Approx(-1.0));
    CHECK(s.x_max == doctest::Approx(2.0));
    CHECK(s.transport(0.0) == doctest::Approx(0.5));
}
