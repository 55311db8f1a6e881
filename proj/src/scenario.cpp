#include "momentkit/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace momentkit {

// ============================================================================
// Expression trees
// ============================================================================

struct AngularExpr::Node {
    enum class Op { num, mu, add, sub, mul, div, pow, exp, neg, dirac };
    Op op;
    double value = 0.0;  // num payload / dirac position
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = AngularExpr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_node(Node::Op op, double v = 0.0, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->value = v;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

double eval_node(const Node& n, double mu) {
    switch (n.op) {
        case Node::Op::num: return n.value;
        case Node::Op::mu: return mu;
        case Node::Op::add: return eval_node(*n.lhs, mu) + eval_node(*n.rhs, mu);
        case Node::Op::sub: return eval_node(*n.lhs, mu) - eval_node(*n.rhs, mu);
        case Node::Op::mul: return eval_node(*n.lhs, mu) * eval_node(*n.rhs, mu);
        case Node::Op::div: return eval_node(*n.lhs, mu) / eval_node(*n.rhs, mu);
        case Node::Op::pow: return std::pow(eval_node(*n.lhs, mu), n.value);
        case Node::Op::exp: return std::exp(eval_node(*n.lhs, mu));
        case Node::Op::neg: return -eval_node(*n.lhs, mu);
        case Node::Op::dirac: return 0.0;  // handled via atoms
    }
    return 0.0;
}

bool contains_dirac(const Node& n) {
    if (n.op == Node::Op::dirac) return true;
    if (n.lhs && contains_dirac(*n.lhs)) return true;
    if (n.rhs && contains_dirac(*n.rhs)) return true;
    return false;
}

bool contains_mu(const Node& n) {
    if (n.op == Node::Op::mu) return true;
    if (n.lhs && contains_mu(*n.lhs)) return true;
    if (n.rhs && contains_mu(*n.rhs)) return true;
    return false;
}

std::optional<double> const_fold(const Node& n) {
    if (contains_dirac(n) || contains_mu(n)) return std::nullopt;
    return eval_node(n, 0.0);
}

// Recursive-descent parser over the closed grammar.
class ExprParser {
  public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters");
        return e;
    }

  private:
    const std::string& s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& why) {
        throw ScenarioParseError("expression error at column " + std::to_string(pos_ + 1) + ": " +
                                 why + " in '" + s_ + "'");
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr expression() {
        NodePtr lhs = term();
        while (true) {
            if (consume('+'))
                lhs = make_node(Node::Op::add, 0, lhs, term());
            else if (consume('-'))
                lhs = make_node(Node::Op::sub, 0, lhs, term());
            else
                return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = unary();
        while (true) {
            if (consume('*'))
                lhs = make_node(Node::Op::mul, 0, lhs, unary());
            else if (consume('/'))
                lhs = make_node(Node::Op::div, 0, lhs, unary());
            else
                return lhs;
        }
    }
    NodePtr unary() {
        if (consume('-')) return make_node(Node::Op::neg, 0, unary());
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        if (consume('^')) {
            NodePtr e = unary();
            auto c = const_fold(*e);
            if (!c) fail("exponent must be constant");
            return make_node(Node::Op::pow, *c, base);
        }
        return base;
    }
    NodePtr primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            if (end == start) fail("bad number");
            pos_ += static_cast<size_t>(end - start);
            return make_node(Node::Op::num, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string word = s_.substr(start, pos_ - start);
            if (word == "mu") return make_node(Node::Op::mu);
            if (word == "exp" || word == "dirac") {
                if (!consume('(')) fail("expected '(' after " + word);
                NodePtr arg = expression();
                if (!consume(')')) fail("expected ')'");
                if (word == "exp") return make_node(Node::Op::exp, 0, arg);
                auto pos = const_fold(*arg);
                if (!pos) fail("dirac position must be constant");
                if (*pos < -1.0 || *pos > 1.0) fail("dirac position outside [-1, 1]");
                return make_node(Node::Op::dirac, *pos);
            }
            fail("unknown identifier '" + word + "'");
        }
        fail("unexpected character");
    }
};

// Splits a parsed tree into smooth additive terms and dirac atoms; dirac
// factors may only be scaled/divided by constants.
struct TermCollector {
    std::vector<std::pair<double, NodePtr>> smooth;  // (sign, term)
    std::vector<Atom> atoms;

    void walk(const NodePtr& n, double sign) {
        if (n->op == Node::Op::add) {
            walk(n->lhs, sign);
            walk(n->rhs, sign);
        } else if (n->op == Node::Op::sub) {
            walk(n->lhs, sign);
            walk(n->rhs, -sign);
        } else if (n->op == Node::Op::neg) {
            walk(n->lhs, -sign);
        } else {
            term(n, sign);
        }
    }
    void term(const NodePtr& n, double sign) {
        if (!contains_dirac(*n)) {
            smooth.emplace_back(sign, n);
            return;
        }
        auto [weight, pos] = dirac_factor(n);
        double w = sign * weight;
        if (w < 0.0) throw ScenarioParseError("negative dirac weight in expression");
        atoms.push_back(Atom{w, pos});
    }
    // (weight, position) of a term that contains exactly one dirac factor.
    std::pair<double, double> dirac_factor(const NodePtr& n) {
        if (n->op == Node::Op::dirac) return {1.0, n->value};
        if (n->op == Node::Op::neg) {
            auto [w, p] = dirac_factor(n->lhs);
            return {-w, p};
        }
        if (n->op == Node::Op::mul) {
            bool in_l = contains_dirac(*n->lhs);
            bool in_r = contains_dirac(*n->rhs);
            if (in_l && in_r)
                throw ScenarioParseError("dirac * dirac is not in the grammar");
            const NodePtr& d = in_l ? n->lhs : n->rhs;
            auto c = const_fold(in_l ? *n->rhs : *n->lhs);
            if (!c) throw ScenarioParseError("dirac may only be scaled by constants");
            auto [w, p] = dirac_factor(d);
            return {w * *c, p};
        }
        if (n->op == Node::Op::div) {
            if (contains_dirac(*n->rhs))
                throw ScenarioParseError("dirac in a denominator is not in the grammar");
            auto c = const_fold(*n->rhs);
            if (!c || *c == 0.0)
                throw ScenarioParseError("dirac may only be divided by nonzero constants");
            auto [w, p] = dirac_factor(n->lhs);
            return {w / *c, p};
        }
        throw ScenarioParseError("dirac must appear as constant * dirac(constant)");
    }
};

}  // namespace

AngularExpr AngularExpr::parse(const std::string& text) {
    AngularExpr e;
    e.text_ = text;
    NodePtr root = ExprParser(text).parse();
    TermCollector tc;
    tc.walk(root, 1.0);
    e.atoms_ = std::move(tc.atoms);
    if (!tc.smooth.empty()) {
        // Rebuild the smooth remainder as a left-leaning sum.
        NodePtr acc;
        for (auto& [sign, node] : tc.smooth) {
            NodePtr t = sign < 0 ? make_node(Node::Op::neg, 0, node) : node;
            acc = acc ? make_node(Node::Op::add, 0, acc, t) : t;
        }
        e.smooth_ = acc;
    }
    return e;
}

double AngularExpr::eval_smooth(double mu) const {
    return smooth_ ? eval_node(*smooth_, mu) : 0.0;
}

// ============================================================================
// Angular densities
// ============================================================================

namespace {
std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

AngularDensity AngularDensity::constant(double value) {
    return from_text(format_number(value));
}

AngularDensity AngularDensity::from_text(const std::string& text) {
    AngularDensity d;
    d.expr = AngularExpr::parse(text);
    // Nonnegativity probe of the smooth part on a fixed grid.
    if (d.expr.has_smooth()) {
        for (int i = 0; i <= 400; ++i) {
            double mu = -1.0 + 2.0 * i / 400.0;
            if (d.expr.eval_smooth(mu) < -1e-12)
                throw ScenarioParseError("angular density is negative at mu = " +
                                         format_number(mu) + ": '" + text + "'");
        }
    }
    return d;
}

MomentVector AngularDensity::moments(int n, Interval iv, int quad_nodes) const {
    std::vector<double> vals(static_cast<size_t>(n) + 1, 0.0);
    if (expr.has_smooth()) {
        TabulatedDensity tab = TabulatedDensity::sample(
            [&](double mu) { return std::max(expr.eval_smooth(mu), 0.0); }, quad_nodes, -1.0, 1.0);
        MomentVector sm = moments_of_density(tab, n, iv);
        for (int j = 0; j <= n; ++j) vals[static_cast<size_t>(j)] += sm[j];
    }
    if (!expr.atoms().empty()) {
        MomentVector am = moments_of_density(AtomicDensity{expr.atoms()}, n, iv);
        for (int j = 0; j <= n; ++j) vals[static_cast<size_t>(j)] += am[j];
    }
    return MomentVector(std::move(vals), iv);
}

MixedMomentVector AngularDensity::mixed_moments(int n, int quad_nodes) const {
    MomentVector full = moments(0, Interval{-1.0, 1.0}, quad_nodes);
    MomentVector up = moments(n, Interval{0.0, 1.0}, quad_nodes);
    MomentVector dn = moments(n, Interval{-1.0, 0.0}, quad_nodes);
    MixedMomentVector g;
    g.order = n;
    g.psi0 = full[0];
    g.plus.assign(up.values.begin() + 1, up.values.end());
    g.minus.assign(dn.values.begin() + 1, dn.values.end());
    return g;
}

// ============================================================================
// Scenario pieces
// ============================================================================

double PiecewiseCoefficient::operator()(double x) const {
    double v = fallback;
    for (const Piece& p : pieces)
        if (x >= p.lo && x <= p.hi) v = p.value;
    return v;
}

const AngularDensity& InitialData::at(double x) const {
    const AngularDensity* best = &fallback;
    for (const Piece& p : pieces)
        if (x >= p.lo && x <= p.hi) best = &p.density;
    return *best;
}

// ============================================================================
// Builtins
// ============================================================================

std::vector<std::string> builtin_scenario_names() {
    return {"one-beam", "two-beams", "rectangular-ic", "source-beam"};
}

Scenario builtin_scenario(const std::string& name) {
    Scenario s;
    s.name = name;
    if (name == "one-beam") {
        s.x_min = -0.5;
        s.x_max = 0.5;
        s.t_end = 4.0;
        s.char_time = 2.0;
        s.snapshot_times = {0.5, 1.0, 2.0, 4.0};
        s.sigma_a.fallback = 0.0;
        s.sigma_a.pieces = {{-0.1, 0.2, 10.0}};
        s.initial.fallback = AngularDensity::constant(1e-4);
        s.left.inflow = AngularDensity::from_text("3*exp(3*mu+3)/(exp(6)-1)");
        s.left.outgoing = 1e-4;
        s.right.inflow = AngularDensity::constant(1e-4);
        s.right.outgoing = 1e-4;
    } else if (name == "two-beams") {
        s.x_min = -0.5;
        s.x_max = 0.5;
        s.t_end = 4.0;
        s.char_time = 4.0;
        s.snapshot_times = {4.0};
        s.sigma_a.fallback = 4.0;
        s.initial.fallback = AngularDensity::constant(1e-4);
        s.left.inflow = AngularDensity::from_text("100*dirac(1)");
        s.left.outgoing = 1e-4;
        s.right.inflow = AngularDensity::from_text("100*dirac(-1)");
        s.right.outgoing = 1e-4;
    } else if (name == "rectangular-ic") {
        s.x_min = 0.0;
        s.x_max = 7.0;
        s.t_end = 1.5;
        s.char_time = 1.0;
        s.snapshot_times = {1.0};
        s.transport.fallback = 1e-2;
        s.initial.fallback = AngularDensity::constant(1e-4);
        s.initial.pieces.push_back({3.0, 4.0, AngularDensity::constant(10.0)});
        s.left.inflow = AngularDensity::constant(1e-4);
        s.left.outgoing = 1e-4;
        s.right.inflow = AngularDensity::constant(1e-4);
        s.right.outgoing = 1e-4;
    } else if (name == "source-beam") {
        s.x_min = 0.0;
        s.x_max = 3.0;
        s.t_end = 4.0;
        s.char_time = 2.0;
        s.snapshot_times = {0.5, 1.0, 2.0, 4.0};
        s.sigma_a.fallback = 0.0;
        s.sigma_a.pieces = {{0.0, 2.0, 1.0}};
        s.transport.fallback = 0.0;
        s.transport.pieces = {{0.0, 1.0, 0.0}, {1.0, 2.0, 2.0}, {2.0, 3.0, 10.0}};
        s.source.pieces = {{1.0, 1.5, 1.0}};
        s.initial.fallback = AngularDensity::constant(1e-4);
        s.left.inflow = AngularDensity::from_text("dirac(1)");
        s.left.outgoing = 1e-4;
        s.right.inflow = AngularDensity::constant(1e-4);
        s.right.outgoing = 1e-4;
    } else {
        throw std::invalid_argument("unknown builtin scenario: " + name);
    }
    return s;
}

// ============================================================================
// Text format
// ============================================================================

namespace {

struct Line {
    int number;
    std::string key, value;  // value empty for [section] lines, key = section
    bool is_section;
};

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& why) {
    throw ScenarioParseError(origin + ":" + std::to_string(line) + ": " + why);
}

std::vector<double> parse_numbers(const std::string& text, size_t max_count = SIZE_MAX) {
    std::istringstream is(text);
    std::vector<double> out;
    double v;
    while (out.size() < max_count && is >> v) out.push_back(v);
    return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    Scenario s;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    bool have_domain = false;

    auto want_numbers = [&](const std::string& v, size_t count) {
        auto nums = parse_numbers(v);
        if (nums.size() != count)
            parse_fail(origin, line_no, "expected " + std::to_string(count) + " numbers");
        return nums;
    };

    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = raw.substr(0, raw.find('#'));
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);

        if (line.front() == '[') {
            if (line.back() != ']') parse_fail(origin, line_no, "malformed section header");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) parse_fail(origin, line_no, "expected key = value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& t) {
            auto a = t.find_first_not_of(" \t");
            auto b = t.find_last_not_of(" \t");
            t = (a == std::string::npos) ? "" : t.substr(a, b - a + 1);
        };
        trim(key);
        trim(value);
        if (value.empty()) parse_fail(origin, line_no, "empty value for '" + key + "'");

        try {
            if (section.empty()) {
                if (key == "name")
                    s.name = value;
                else if (key == "domain") {
                    auto d = want_numbers(value, 2);
                    s.x_min = d[0];
                    s.x_max = d[1];
                    have_domain = true;
                } else if (key == "t_end")
                    s.t_end = want_numbers(value, 1)[0];
                else if (key == "char_time")
                    s.char_time = want_numbers(value, 1)[0];
                else if (key == "snapshots")
                    s.snapshot_times = parse_numbers(value);
                else
                    parse_fail(origin, line_no, "unknown key '" + key + "'");
            } else if (section == "sigma_a" || section == "transport" || section == "source") {
                PiecewiseCoefficient& c = section == "sigma_a"  ? s.sigma_a
                                          : section == "transport" ? s.transport
                                                                   : s.source;
                if (key == "fallback")
                    c.fallback = want_numbers(value, 1)[0];
                else if (key == "piece") {
                    auto nums = want_numbers(value, 3);
                    if (!(nums[0] < nums[1]))
                        parse_fail(origin, line_no, "piece interval must satisfy lo < hi");
                    if (nums[2] < 0.0) parse_fail(origin, line_no, "coefficient must be >= 0");
                    c.pieces.push_back({nums[0], nums[1], nums[2]});
                } else
                    parse_fail(origin, line_no, "unknown key '" + key + "'");
                if (key == "fallback" && c.fallback < 0.0)
                    parse_fail(origin, line_no, "coefficient must be >= 0");
            } else if (section == "initial") {
                if (key == "fallback")
                    s.initial.fallback = AngularDensity::from_text(value);
                else if (key == "piece") {
                    std::istringstream ps(value);
                    double lo, hi;
                    if (!(ps >> lo >> hi) || !(lo < hi))
                        parse_fail(origin, line_no, "piece needs 'lo hi expression'");
                    std::string expr;
                    std::getline(ps, expr);
                    s.initial.pieces.push_back({lo, hi, AngularDensity::from_text(expr)});
                } else
                    parse_fail(origin, line_no, "unknown key '" + key + "'");
            } else if (section == "boundary_left" || section == "boundary_right") {
                BoundaryData& b = section == "boundary_left" ? s.left : s.right;
                if (key == "inflow")
                    b.inflow = AngularDensity::from_text(value);
                else if (key == "outgoing") {
                    b.outgoing = want_numbers(value, 1)[0];
                    if (b.outgoing < 0.0) parse_fail(origin, line_no, "outgoing must be >= 0");
                } else
                    parse_fail(origin, line_no, "unknown key '" + key + "'");
            } else {
                parse_fail(origin, line_no, "unknown section '" + section + "'");
            }
        } catch (const ScenarioParseError&) {
            throw;
        } catch (const std::exception& e) {
            parse_fail(origin, line_no, e.what());
        }
    }

    if (!have_domain || !(s.x_min < s.x_max))
        throw ScenarioParseError(origin + ": scenario needs a valid 'domain = a b'");
    if (!(s.t_end > 0.0)) throw ScenarioParseError(origin + ": t_end must be positive");
    for (double t : s.snapshot_times)
        if (t <= 0.0 || t > s.t_end)
            throw ScenarioParseError(origin + ": snapshot times must lie in (0, t_end]");
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioParseError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_scenario(buf.str(), path);
}

std::string serialize_scenario(const Scenario& s) {
    std::ostringstream os;
    os << "name = " << s.name << "\n";
    os << "domain = " << format_number(s.x_min) << " " << format_number(s.x_max) << "\n";
    os << "t_end = " << format_number(s.t_end) << "\n";
    os << "char_time = " << format_number(s.char_time) << "\n";
    os << "snapshots =";
    for (double t : s.snapshot_times) os << " " << format_number(t);
    os << "\n";
    auto coeff = [&](const char* name, const PiecewiseCoefficient& c) {
        os << "\n[" << name << "]\n";
        os << "fallback = " << format_number(c.fallback) << "\n";
        for (const auto& p : c.pieces)
            os << "piece = " << format_number(p.lo) << " " << format_number(p.hi) << " "
               << format_number(p.value) << "\n";
    };
    coeff("sigma_a", s.sigma_a);
    coeff("transport", s.transport);
    coeff("source", s.source);
    os << "\n[initial]\n";
    os << "fallback = " << s.initial.fallback.expr.text() << "\n";
    for (const auto& p : s.initial.pieces)
        os << "piece = " << format_number(p.lo) << " " << format_number(p.hi) << " "
           << p.density.expr.text() << "\n";
    auto boundary = [&](const char* name, const BoundaryData& b) {
        os << "\n[" << name << "]\n";
        os << "inflow = " << b.inflow.expr.text() << "\n";
        os << "outgoing = " << format_number(b.outgoing) << "\n";
    };
    boundary("boundary_left", s.left);
    boundary("boundary_right", s.right);
    return os.str();
}

}  // namespace momentkit
