#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "momentkit/fp_reference.hpp"
#include "momentkit/fv_solver.hpp"
#include "momentkit/metrics.hpp"
#include "momentkit/scenario.hpp"

namespace mk = momentkit;

namespace {

// Exit codes: 0 success, 1 usage/input error, 2 numerical failure,
// 3 moment vector not realizable.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;
constexpr int kNotRealizable = 3;

struct RunArgs {
    std::string scenario;
    std::string model = "mm1";
    std::string out = "out";
    int nx = 200;
    int nmu = 100;
    int frames = 32;
    double cfl = 0.9;
};

struct CheckArgs {
    std::vector<double> values;
    bool mixed = false;
    int order = 0;  // 0: inferred from the value count
    double tol = 1e-9;
};

struct BenchArgs {
    std::string scenario;
    std::string models = "mm1,mk1,mk2,m1,k1,pn:11";
    std::string out = "out";
    int nx = 200;
    int nmu = 100;
    int frames = 32;
    double cfl = 0.9;
};

mk::Scenario resolve_scenario(const std::string& s) {
    for (const std::string& n : mk::builtin_scenario_names())
        if (n == s) return mk::builtin_scenario(s);
    return mk::load_scenario(s);
}

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ':', '-');
    return s;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int thread_cap() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("MOMENT_KIT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) n = static_cast<unsigned>(v);
    }
    return static_cast<int>(n);
}

// Snapshot CSVs at the scenario's reporting times plus the full long-format
// field history.
void write_outputs(const std::string& dir, const std::string& model, const mk::DensityField& f,
                   const mk::Scenario& sc) {
    mk::DensityField snaps;
    snaps.x = f.x;
    for (double t : sc.snapshot_times)
        for (size_t k = 0; k < f.times.size(); ++k)
            if (std::abs(f.times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
                snaps.times.push_back(f.times[k]);
                snaps.density.push_back(f.density[k]);
                break;
            }
    if (!snaps.times.empty()) mk::write_snapshot_csvs(dir, model, snaps);
    mk::write_field_csv(dir + "/field_" + sanitize(model) + ".csv", model, f);
}

int do_run(const RunArgs& a) {
    mk::Scenario sc = resolve_scenario(a.scenario);
    std::filesystem::create_directories(a.out);
    if (a.model == "fp") {
        mk::FpOptions opt;
        opt.nx = a.nx;
        opt.nmu = a.nmu;
        opt.cfl = a.cfl;
        opt.frame_count = a.frames;
        mk::FpSolver solver(sc, opt);
        mk::FpRunResult res = solver.run();
        write_outputs(a.out, "fp", res.field, sc);
        std::cout << "fp: " << res.steps << " steps, mass " << mk::csv_number(res.initial_mass)
                  << " -> " << mk::csv_number(res.final_mass) << ", final anisotropy "
                  << mk::csv_number(res.anisotropy.back()) << "\n";
        return kOk;
    }
    mk::ClosureModel model = mk::ClosureModel::parse(a.model);
    mk::SolverOptions opt;
    opt.nx = a.nx;
    opt.cfl = a.cfl;
    opt.frame_count = a.frames;
    mk::FvSolver solver(sc, model, opt);
    mk::RunResult res = solver.run();
    write_outputs(a.out, model.name(), res.field, sc);
    std::cout << model.name() << ": " << res.log.steps << " accepted steps (" << res.log.rejected
              << " rejected, " << res.log.projected_states << " projected states)\n"
              << "  mass " << mk::csv_number(res.audit.initial_mass) << " -> "
              << mk::csv_number(res.audit.final_mass) << ", conservation drift "
              << mk::csv_number(res.audit.drift()) << "\n"
              << "  min density " << mk::csv_number(mk::min_density(res.field)) << "\n";
    return kOk;
}

void print_atoms(const mk::AtomicDensity& d, const std::string& label) {
    for (const mk::Atom& at : d.atoms)
        std::cout << "  " << label << "atom: weight " << mk::csv_number(at.weight) << " at mu = "
                  << mk::csv_number(at.position) << "\n";
}

int do_check(const CheckArgs& a) {
    mk::RealizabilityVerdict v;
    if (a.mixed) {
        const int n = a.order > 0 ? a.order : static_cast<int>(a.values.size()) / 2;
        if (n < 1 || a.values.size() != static_cast<size_t>(2 * n + 1)) {
            std::cerr << "error: mixed order " << n << " needs " << 2 * n + 1
                      << " values (psi0, plus 1.." << n << ", minus 1.." << n << ")\n";
            return kUsage;
        }
        mk::MixedMomentVector g(a.values[0],
                                std::vector<double>(a.values.begin() + 1, a.values.begin() + 1 + n),
                                std::vector<double>(a.values.begin() + 1 + n, a.values.end()));
        v = mk::is_realizable_mixed(g, a.tol);
        std::cout << (v.realizable ? "realizable" : "not realizable") << ", margin "
                  << mk::csv_number(v.margin) << "\n";
        if (v.failed != mk::Condition::none)
            std::cout << "tightest condition: " << mk::to_string(v.failed) << "\n";
        if (v.realizable) {
            try {
                print_atoms(mk::mixed_atomic_side(mk::Side::plus, g), "plus ");
                print_atoms(mk::mixed_atomic_side(mk::Side::minus, g), "minus ");
            } catch (const std::exception&) {
                std::cout << "  (no atomic representation reported: degenerate boundary case)\n";
            }
        }
    } else {
        if (a.values.empty()) {
            std::cerr << "error: no moment values given\n";
            return kUsage;
        }
        if (a.order > 0 && a.values.size() != static_cast<size_t>(a.order) + 1) {
            std::cerr << "error: order " << a.order << " needs " << a.order + 1 << " values\n";
            return kUsage;
        }
        mk::MomentVector m(a.values);
        v = mk::is_realizable_full(m, a.tol);
        std::cout << (v.realizable ? "realizable" : "not realizable") << ", margin "
                  << mk::csv_number(v.margin) << "\n";
        if (v.failed != mk::Condition::none)
            std::cout << "tightest condition: " << mk::to_string(v.failed) << "\n";
        if (v.realizable) {
            try {
                print_atoms(mk::minimal_atomic_measure(m), "");
            } catch (const std::exception&) {
                std::cout << "  (no atomic representation reported: degenerate boundary case)\n";
            }
        }
    }
    return v.realizable ? kOk : kNotRealizable;
}

struct BenchJob {
    mk::ClosureModel model;
    mk::RunResult result;
    std::exception_ptr error;
};

int do_bench(const BenchArgs& a) {
    mk::Scenario sc = resolve_scenario(a.scenario);
    std::vector<BenchJob> jobs;
    for (const std::string& name : split_list(a.models))
        jobs.push_back(BenchJob{mk::ClosureModel::parse(name), {}, nullptr});
    if (jobs.empty()) {
        std::cerr << "error: no models selected\n";
        return kUsage;
    }
    std::filesystem::create_directories(a.out);

    mk::FpOptions fopt;
    fopt.nx = a.nx;
    fopt.nmu = a.nmu;
    fopt.cfl = a.cfl;
    fopt.frame_count = a.frames;
    mk::FpSolver fp(sc, fopt);
    mk::FpRunResult ref = fp.run();
    write_outputs(a.out, "fp", ref.field, sc);
    std::cout << "reference fp: " << ref.steps << " steps, mass "
              << mk::csv_number(ref.initial_mass) << " -> " << mk::csv_number(ref.final_mass)
              << ", final anisotropy " << mk::csv_number(ref.anisotropy.back()) << "\n";

    const int workers = std::min<int>(thread_cap(), static_cast<int>(jobs.size()));
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            try {
                mk::SolverOptions opt;
                opt.nx = a.nx;
                opt.cfl = a.cfl;
                opt.frame_count = a.frames;
                mk::FvSolver solver(sc, jobs[k].model, opt);
                jobs[k].result = solver.run();
            } catch (...) {
                jobs[k].error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();

    bool any_failed = false;
    std::vector<mk::TableRow> rows;
    for (BenchJob& j : jobs) {
        const std::string name = j.model.name();
        if (j.error) {
            any_failed = true;
            try {
                std::rethrow_exception(j.error);
            } catch (const std::exception& e) {
                std::cout << name << ": FAILED: " << e.what() << "\n";
            }
            continue;
        }
        write_outputs(a.out, name, j.result.field, sc);
        rows.push_back(mk::TableRow{name, mk::space_time_error(ref.field, j.result.field),
                                    mk::snapshot_error(ref.field, j.result.field, sc.char_time)});
        std::cout << name << ": " << j.result.log.steps << " steps ("
                  << j.result.log.projected_states << " projected), drift "
                  << mk::csv_number(j.result.audit.drift()) << ", min density "
                  << mk::csv_number(mk::min_density(j.result.field)) << "\n";
    }
    if (!rows.empty()) {
        mk::write_error_table_csv(a.out + "/errors.csv", rows);
        std::cout << "relative density errors against fp (space-time and t = "
                  << mk::csv_number(sc.char_time) << "):\n"
                  << mk::format_error_table(rows);
    }
    return any_failed ? kNumerical : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    std::string builtin_list;
    for (const std::string& n : mk::builtin_scenario_names())
        builtin_list += (builtin_list.empty() ? "" : ", ") + n;

    CLI::App app{"moment solvers for one-dimensional angular transport"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand(
        "run", "integrate one model on a scenario and write density CSVs");
    run->add_option("--scenario", run_args.scenario,
                    "builtin scenario (" + builtin_list + ") or scenario file")
        ->required();
    run->add_option("--model", run_args.model,
                    "pn:N, m1, k1, mpn:N, mm1, mk1, mk2, or fp (kinetic reference)")->capture_default_str();
    run->add_option("--nx", run_args.nx, "spatial cells")->capture_default_str();
    run->add_option("--nmu", run_args.nmu, "angular intervals (fp only)")->capture_default_str();
    run->add_option("--cfl", run_args.cfl, "advective step fraction")->capture_default_str();
    run->add_option("--frames", run_args.frames, "stored frames per run")->capture_default_str();
    run->add_option("--out", run_args.out, "output directory")->capture_default_str();

    CheckArgs check_args;
    CLI::App* check = app.add_subcommand("check", "test a moment vector for realizability");
    check->add_option("moments", check_args.values,
                      "full layout psi0..psiN, or with --mixed: psi0, plus 1..N, minus 1..N")
        ->required()
        ->expected(-1);
    check->add_flag("--mixed", check_args.mixed, "interpret input as mixed half-range moments");
    check->add_option("--order", check_args.order, "moment order N (default: from value count)");
    check->add_option("--tol", check_args.tol, "margin tolerance")->capture_default_str();

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand(
        "bench", "run the kinetic reference plus a model list and tabulate errors");
    bench->add_option("--scenario", bench_args.scenario,
                      "builtin scenario (" + builtin_list + ") or scenario file")
        ->required();
    bench->add_option("--models", bench_args.models, "comma-separated model list")->capture_default_str();
    bench->add_option("--nx", bench_args.nx, "spatial cells")->capture_default_str();
    bench->add_option("--nmu", bench_args.nmu, "angular intervals for the reference")->capture_default_str();
    bench->add_option("--cfl", bench_args.cfl, "advective step fraction")->capture_default_str();
    bench->add_option("--frames", bench_args.frames, "stored frames per run")->capture_default_str();
    bench->add_option("--out", bench_args.out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (run->parsed()) return do_run(run_args);
        if (check->parsed()) return do_check(check_args);
        if (bench->parsed()) return do_bench(bench_args);
    } catch (const mk::ScenarioParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
    return kUsage;
}
