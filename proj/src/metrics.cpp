#include "momentkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace momentkit {

namespace {

void check_field(const DensityField& f) {
    if (f.x.empty() || f.times.empty()) throw std::invalid_argument("empty density field");
    if (f.density.size() != f.times.size())
        throw std::invalid_argument("density field: row count does not match times");
    for (const auto& row : f.density)
        if (row.size() != f.x.size())
            throw std::invalid_argument("density field: row length does not match grid");
}

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    if (x.size() < 2) {
        if (!x.empty()) w[0] = 1.0;
        return w;
    }
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

// Piecewise-linear interpolation with end clamping.
std::vector<double> interp_row(const std::vector<double>& xs, const std::vector<double>& ys,
                               const std::vector<double>& xq) {
    std::vector<double> out(xq.size());
    for (size_t k = 0; k < xq.size(); ++k) {
        const double x = xq[k];
        if (x <= xs.front()) {
            out[k] = ys.front();
        } else if (x >= xs.back()) {
            out[k] = ys.back();
        } else {
            const size_t j =
                static_cast<size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
            const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
            out[k] = (1.0 - t) * ys[j - 1] + t * ys[j];
        }
    }
    return out;
}

struct NormAccumulator {
    double l1 = 0.0, l2 = 0.0, linf = 0.0;
    void add(double weight, double v) {
        const double a = std::abs(v);
        l1 += weight * a;
        l2 += weight * a * a;
        linf = std::max(linf, a);
    }
    ErrorNorms finish() const { return {l1, std::sqrt(l2), linf}; }
};

ErrorNorms relative(const NormAccumulator& diff, const NormAccumulator& ref) {
    ErrorNorms d = diff.finish();
    ErrorNorms r = ref.finish();
    if (!(r.l1 > 0.0) || !(r.l2 > 0.0) || !(r.linf > 0.0))
        throw std::invalid_argument("reference norm vanishes");
    return {d.l1 / r.l1, d.l2 / r.l2, d.linf / r.linf};
}

size_t nearest_time_index(const std::vector<double>& times, double t_star) {
    size_t best = 0;
    for (size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - t_star) < std::abs(times[best] - t_star)) best = k;
    return best;
}

std::string sanitize_name(std::string s) {
    std::replace(s.begin(), s.end(), ':', '-');
    return s;
}

}  // namespace

ErrorNorms space_time_error(const DensityField& reference, const DensityField& candidate) {
    check_field(reference);
    check_field(candidate);
    if (reference.times.size() != candidate.times.size())
        throw std::invalid_argument("space_time_error: snapshot schedules differ in length");
    for (size_t k = 0; k < reference.times.size(); ++k)
        if (std::abs(reference.times[k] - candidate.times[k]) >
            1e-9 * std::max(1.0, std::abs(reference.times[k])))
            throw std::invalid_argument("space_time_error: snapshot times do not match");

    const std::vector<double> wt = trapezoid_weights(candidate.times);
    const std::vector<double> wx = trapezoid_weights(candidate.x);
    NormAccumulator diff, ref;
    for (size_t k = 0; k < candidate.times.size(); ++k) {
        const std::vector<double> r = interp_row(reference.x, reference.density[k], candidate.x);
        for (size_t i = 0; i < candidate.x.size(); ++i) {
            const double weight = wt[k] * wx[i];
            diff.add(weight, candidate.density[k][i] - r[i]);
            ref.add(weight, r[i]);
        }
    }
    return relative(diff, ref);
}

ErrorNorms snapshot_error(const DensityField& reference, const DensityField& candidate,
                          double t_star) {
    check_field(reference);
    check_field(candidate);
    const size_t kr = nearest_time_index(reference.times, t_star);
    const size_t kc = nearest_time_index(candidate.times, t_star);
    const std::vector<double> r = interp_row(reference.x, reference.density[kr], candidate.x);
    const std::vector<double> wx = trapezoid_weights(candidate.x);
    NormAccumulator diff, ref;
    for (size_t i = 0; i < candidate.x.size(); ++i) {
        diff.add(wx[i], candidate.density[kc][i] - r[i]);
        ref.add(wx[i], r[i]);
    }
    return relative(diff, ref);
}

double min_density(const DensityField& f) {
    check_field(f);
    double lo = f.density[0][0];
    for (const auto& row : f.density)
        for (double v : row) lo = std::min(lo, v);
    return lo;
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> write_snapshot_csvs(const std::string& dir, const std::string& model,
                                             const DensityField& f) {
    check_field(f);
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    const std::string stem = sanitize_name(model);
    for (size_t k = 0; k < f.times.size(); ++k) {
        std::string path = dir + "/snap_" + stem + "_" + csv_number(f.times[k]) + ".csv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << "x,density\n";
        for (size_t i = 0; i < f.x.size(); ++i)
            out << csv_number(f.x[i]) << ',' << csv_number(f.density[k][i]) << '\n';
        paths.push_back(std::move(path));
    }
    return paths;
}

void write_field_csv(const std::string& path, const std::string& model, const DensityField& f) {
    check_field(f);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "model,time,x,density\n";
    for (size_t k = 0; k < f.times.size(); ++k)
        for (size_t i = 0; i < f.x.size(); ++i)
            out << model << ',' << csv_number(f.times[k]) << ',' << csv_number(f.x[i]) << ','
                << csv_number(f.density[k][i]) << '\n';
}

DensityField read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    DensityField f;
    bool first_block = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string model, t_s, x_s, d_s;
        if (!std::getline(row, model, ',') || !std::getline(row, t_s, ',') ||
            !std::getline(row, x_s, ',') || !std::getline(row, d_s))
            throw std::runtime_error(path + ": malformed row '" + line + "'");
        const double t = std::strtod(t_s.c_str(), nullptr);
        const double x = std::strtod(x_s.c_str(), nullptr);
        const double d = std::strtod(d_s.c_str(), nullptr);
        if (f.times.empty() || t != f.times.back()) {
            if (!f.times.empty()) first_block = false;
            f.times.push_back(t);
            f.density.emplace_back();
        }
        if (first_block) f.x.push_back(x);
        f.density.back().push_back(d);
    }
    check_field(f);
    return f;
}

std::string format_error_table(const std::vector<TableRow>& rows) {
    size_t name_width = 5;
    for (const TableRow& r : rows) name_width = std::max(name_width, r.model.size());
    std::ostringstream out;
    auto cell = [&](double v) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%11.3e", v);
        out << buf;
    };
    out << std::string(name_width, ' ') << "         l1         l2       linf"
        << "    char_l1    char_l2  char_linf\n";
    for (const TableRow& r : rows) {
        out << r.model << std::string(name_width - r.model.size(), ' ');
        cell(r.space_time.l1);
        cell(r.space_time.l2);
        cell(r.space_time.linf);
        cell(r.at_char_time.l1);
        cell(r.at_char_time.l2);
        cell(r.at_char_time.linf);
        out << '\n';
    }
    return out.str();
}

void write_error_table_csv(const std::string& path, const std::vector<TableRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "model,l1,l2,linf,char_l1,char_l2,char_linf\n";
    for (const TableRow& r : rows)
        out << r.model << ',' << csv_number(r.space_time.l1) << ',' << csv_number(r.space_time.l2)
            << ',' << csv_number(r.space_time.linf) << ',' << csv_number(r.at_char_time.l1) << ','
            << csv_number(r.at_char_time.l2) << ',' << csv_number(r.at_char_time.linf) << '\n';
}

}  // namespace momentkit
