// dsplit: command-line front end for the direction-splitting solver.
//
//   dsplit convergence [--config f] [--workers n] [overrides]
//   dsplit run | cavity | step | selftest ...
//
// Exit codes: 0 ok, 1 invalid input, 2 numerical failure, 3 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dsplit.hpp"

namespace fs = std::filesystem;
using namespace dsplit;

namespace {

struct Options {
    std::string config_path;
    int workers = 0;  // 0: take run.workers from the config
    std::optional<std::string> case_name;
    std::optional<std::string> variant;
    std::optional<double> tau, chi, re, nu, end_time, h, lid, steady_tol, t_max;
    std::optional<int> n;
    std::optional<std::string> taus, profile_times, output_dir;
    std::optional<long> dump_interval;
    bool vtk = false;
    std::vector<std::string> sets;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void add_overrides(CLI::App* app, Options& o) {
    app->add_option("--config", o.config_path, "configuration file ([section] key = value)");
    app->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1, 256));
    app->add_option("--case", o.case_name, "case.name: mms2d, mms3d, cavity, step, custom");
    app->add_option("--variant", o.variant, "scheme.variant: pr2d, douglas, bdf2");
    app->add_option("--tau", o.tau, "scheme.tau");
    app->add_option("--chi", o.chi, "scheme.chi");
    app->add_option("--re", o.re, "scheme.re");
    app->add_option("--nu", o.nu, "scheme.nu");
    app->add_option("--end-time", o.end_time, "scheme.end_time");
    app->add_option("--n", o.n, "grid.n (cells per axis)");
    app->add_option("--grid-h", o.h, "grid.h (step case cell size)");
    app->add_option("--taus", o.taus, "study.taus, comma separated");
    app->add_option("--lid", o.lid, "cavity.lid");
    app->add_option("--profile-times", o.profile_times, "cavity.profile_times, comma separated");
    app->add_option("--steady-tol", o.steady_tol, "step.steady_tol");
    app->add_option("--t-max", o.t_max, "step.t_max");
    app->add_option("--output-dir", o.output_dir, "output.dir");
    app->add_option("--dump-interval", o.dump_interval, "output.dump_interval (steps, 0 = final only)");
    app->add_flag("--vtk", o.vtk, "also write legacy VTK field dumps");
    app->add_option("--set", o.sets, "any section.key=value override")->take_all();
}

RunConfig load(const Options& o, const std::string& default_case) {
    std::string text;
    if (!o.config_path.empty()) text = read_file(o.config_path);
    std::vector<std::string> ov;
    const auto put = [&](const char* key, const std::string& value) { ov.push_back(std::string(key) + "=" + value); };
    if (o.config_path.empty() || o.case_name) put("case.name", o.case_name.value_or(default_case));
    if (o.variant) put("scheme.variant", *o.variant);
    if (o.tau) put("scheme.tau", fmt(*o.tau));
    if (o.chi) put("scheme.chi", fmt(*o.chi));
    if (o.re) put("scheme.re", fmt(*o.re));
    if (o.nu) put("scheme.nu", fmt(*o.nu));
    if (o.end_time) put("scheme.end_time", fmt(*o.end_time));
    if (o.n) put("grid.n", std::to_string(*o.n));
    if (o.h) put("grid.h", fmt(*o.h));
    if (o.taus) put("study.taus", *o.taus);
    if (o.lid) put(o.case_name == "custom" ? "custom.lid" : "cavity.lid", fmt(*o.lid));
    if (o.profile_times) put("cavity.profile_times", *o.profile_times);
    if (o.steady_tol) put("step.steady_tol", fmt(*o.steady_tol));
    if (o.t_max) put("step.t_max", fmt(*o.t_max));
    if (o.output_dir) put("output.dir", *o.output_dir);
    if (o.dump_interval) put("output.dump_interval", std::to_string(*o.dump_interval));
    if (o.vtk) put("output.vtk", "true");
    if (o.workers > 0) put("run.workers", std::to_string(o.workers));
    for (const auto& s : o.sets) ov.push_back(s);
    return parse_config(text, ov);
}

void require_case(const RunConfig& c, std::initializer_list<CaseKind> allowed, const char* command) {
    for (CaseKind k : allowed)
        if (c.kind == k) return;
    throw ValidationError(std::string(command) + " does not apply to case '" + to_string(c.kind) + "'");
}

ManufacturedSolution mms_for(const RunConfig& c) {
    return c.kind == CaseKind::Mms3d ? ManufacturedSolution::stokes_3d(c.scheme.nu)
                                     : ManufacturedSolution::stokes_2d(c.scheme.nu);
}

// Outputs are rendered to memory first so an aborted run leaves no files behind.
using Outputs = std::vector<std::pair<fs::path, std::string>>;

void flush(const Outputs& outs) {
    for (const auto& [path, body] : outs) write_file(path, [&](std::ostream& os) { os << body; });
}

int cmd_convergence(const RunConfig& c) {
    require_case(c, {CaseKind::Mms2d, CaseKind::Mms3d}, "convergence");
    const ConvergenceTable table = convergence_study(mms_for(c), c.grid(), c.scheme, c.taus, c.workers);
    std::ostringstream csv;
    table.write_csv(csv);
    flush({{fs::path(c.output_dir) / "convergence.csv", csv.str()}});
    std::cout << csv.str();
    return 0;
}

FlowProblem problem_for(const RunConfig& c) {
    switch (c.kind) {
        case CaseKind::Mms2d:
        case CaseKind::Mms3d: return mms_for(c).problem(c.grid());
        case CaseKind::Cavity: return cavity_problem(c.grid(), c.lid);
        case CaseKind::Step: return step_problem(c.h);
        case CaseKind::Custom: return box_problem(c.grid(), c.lid, c.force);
    }
    throw ValidationError("unknown case");
}

int cmd_run(const RunConfig& c) {
    Executor exec(c.workers);
    const Stepper stepper(problem_for(c), c.scheme, exec);
    FlowState s = stepper.initialize();
    Outputs outs;
    const auto dump = [&] {
        std::ostringstream name;
        name << "field_" << std::setw(6) << std::setfill('0') << s.k;
        std::ostringstream csv;
        write_field_csv(csv, s.u, s.p);
        outs.emplace_back(fs::path(c.output_dir) / (name.str() + ".csv"), csv.str());
        if (c.vtk) {
            std::ostringstream vtk;
            write_vtk(vtk, s.u, s.p);
            outs.emplace_back(fs::path(c.output_dir) / (name.str() + ".vtk"), vtk.str());
        }
    };
    const long steps = c.scheme.step_count();
    for (long k = 0; k < steps; ++k) {
        stepper.advance(s);
        if (c.dump_interval > 0 && s.k % c.dump_interval == 0 && s.k != steps) dump();
    }
    dump();
    flush(outs);
    std::cout << "case=" << to_string(c.kind) << " steps=" << s.k << " t=" << s.t
              << " max|u|=" << max_abs(s.u) << " |div u|=" << l2_norm(divergence(s.u)) << '\n';
    if (c.kind == CaseKind::Mms2d || c.kind == CaseKind::Mms3d) {
        const ManufacturedSolution m = mms_for(c);
        std::cout << "err_u_l2=" << l2_error_velocity(s.u, m.velocity, s.t)
                  << " err_p_l2=" << l2_error_pressure(s.p, m.pressure, stepper.pressure_time(s)) << '\n';
    }
    return 0;
}

int cmd_cavity(const RunConfig& c) {
    require_case(c, {CaseKind::Cavity}, "cavity");
    Executor exec(c.workers);
    std::vector<double> times = c.profile_times;
    if (times.empty()) times.push_back(c.scheme.end_time);
    const auto snaps = run_cavity(c.re, c.cells[0], c.scheme.tau, times, c.scheme, exec, c.lid);
    Outputs outs;
    for (const auto& snap : snaps) {
        std::ostringstream tag, u, v;
        tag << "t" << snap.time;
        snap.u_vertical.write_csv(u);
        snap.v_horizontal.write_csv(v);
        outs.emplace_back(fs::path(c.output_dir) / ("cavity_u_" + tag.str() + ".csv"), u.str());
        outs.emplace_back(fs::path(c.output_dir) / ("cavity_v_" + tag.str() + ".csv"), v.str());
    }
    flush(outs);
    for (const auto& [path, body] : outs) std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_step(const RunConfig& c) {
    require_case(c, {CaseKind::Step}, "step");
    Executor exec(c.workers);
    StepOptions opt;
    opt.re = c.re;
    opt.h = c.h;
    opt.tau = c.scheme.tau;
    opt.chi = c.scheme.chi;
    opt.steady_tol = c.steady_tol;
    opt.t_max = c.t_max;
    const RecirculationReport rep = run_backward_facing_step(opt, exec);
    std::ostringstream csv;
    rep.write_csv(csv);
    flush({{fs::path(c.output_dir) / "step_report.csv", csv.str()}});
    std::cout << csv.str();
    if (!rep.r) std::cerr << "warning: no reattachment point found on the lower wall\n";
    if (!rep.steady) std::cerr << "warning: steadiness tolerance not reached by t_max\n";
    return 0;
}

int cmd_selftest() {
    const auto results = run_selftest();
    print_results(std::cout, results);
    return all_passed(results) ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Direction-splitting incompressible flow solver"};
    app.require_subcommand(1);
    Options opts;
    struct Sub {
        const char* name;
        const char* help;
        const char* default_case;
    };
    const Sub subs[] = {{"convergence", "time-step convergence study on a manufactured solution", "mms2d"},
                        {"run", "integrate a case and dump fields", "mms2d"},
                        {"cavity", "lid-driven cavity centerline profiles", "cavity"},
                        {"step", "backward-facing step recirculation length", "step"}};
    std::map<std::string, CLI::App*> apps;
    for (const auto& s : subs) {
        apps[s.name] = app.add_subcommand(s.name, s.help);
        add_overrides(apps[s.name], opts);
    }
    app.add_subcommand("selftest", "run the property suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "selftest") return cmd_selftest();
        std::string def;
        for (const auto& s : subs)
            if (name == s.name) def = s.default_case;
        const RunConfig cfg = load(opts, def);
        if (name == "convergence") return cmd_convergence(cfg);
        if (name == "run") return cmd_run(cfg);
        if (name == "cavity") return cmd_cavity(cfg);
        return cmd_step(cfg);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
