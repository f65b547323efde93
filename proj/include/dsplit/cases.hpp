#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <string>
#include <ostream>
#include <vector>

#include "dsplit/operators.hpp"
#include "dsplit/scheme.hpp"

namespace dsplit {

// --- profiles -----------------------------------------------------------------

/// Samples of one velocity component along a grid line.
struct Profile {
    std::vector<double> coord;
    std::vector<double> value;

    /// Linear interpolation, extended linearly past the end samples.
    double at(double x) const {
        if (coord.size() < 2) throw ValidationError("profile needs at least two samples");
        std::size_t i = 1;
        while (i + 1 < coord.size() && coord[i] < x) ++i;
        const double w = (x - coord[i - 1]) / (coord[i] - coord[i - 1]);
        return value[i - 1] + w * (value[i] - value[i - 1]);
    }

    void write_csv(std::ostream& os) const {
        os << "coord,value\n" << std::setprecision(17);
        for (std::size_t i = 0; i < coord.size(); ++i) os << coord[i] << ',' << value[i] << '\n';
    }
};

/// Component `comp` on the line where coordinate `comp` equals `position`,
/// running along `along` through cell centers (mid-depth cells in 3D).
inline Profile component_profile(const StaggeredVectorField& u, int comp, double position, int along) {
    const GridSpec& g = u.grid;
    if (comp == along || comp >= g.dim || along >= g.dim) throw ValidationError("bad profile axes");
    const double h = g.h[static_cast<std::size_t>(comp)];
    const int n = g.n[static_cast<std::size_t>(comp)];
    const double s = std::clamp(position / h, 0.0, static_cast<double>(n));
    const int f0 = std::min(static_cast<int>(std::floor(s)), n - 1);
    const double w = s - f0;
    Profile p;
    const int m = g.n[static_cast<std::size_t>(along)];
    for (int i = 0; i < m; ++i) {
        Index3 idx{0, 0, 0};
        for (int a = 0; a < g.dim; ++a) idx[static_cast<std::size_t>(a)] = g.n[static_cast<std::size_t>(a)] / 2;
        idx[static_cast<std::size_t>(along)] = i;
        idx[static_cast<std::size_t>(comp)] = f0;
        Index3 idx1 = idx;
        idx1[static_cast<std::size_t>(comp)] = f0 + 1;
        p.coord.push_back(g.cell_center(along, i));
        p.value.push_back((1.0 - w) * u[comp][idx] + w * u[comp][idx1]);
    }
    return p;
}

/// Max |a(x) - b(x)| over the sample points of a, with b interpolated.
inline double profile_distance(const Profile& a, const Profile& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.coord.size(); ++i) d = std::max(d, std::abs(a.value[i] - b.at(a.coord[i])));
    return d;
}

// --- steadiness ------------------------------------------------------------------

/// max |u_new - u_old| / tau <= tol.
inline bool steady_detect(const StaggeredVectorField& u_new, const StaggeredVectorField& u_old, double tau,
                          double tol = 1e-6) {
    double m = 0.0;
    for (int c = 0; c < u_new.dim(); ++c) {
        const auto& a = u_new[c].raw();
        const auto& b = u_old[c].raw();
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m / tau <= tol;
}

// --- lid-driven cavity ------------------------------------------------------------

/// Unit square, no-slip walls, tangential velocity `lid` on y = 1 (corners included).
inline FlowProblem cavity_problem(const GridSpec& grid, double lid = 1.0) {
    FlowProblem pb;
    pb.grid = grid;
    pb.bcs = BoundarySpec::no_slip();
    if (lid != 0.0) pb.bcs.at(1, 1).value = [lid](int c, const Point&, double) { return c == 0 ? lid : 0.0; };
    return pb;
}

/// Closed box with no-slip walls, a moving y = 1 wall at speed `lid` (0 for none)
/// and a constant body force, starting from rest.
inline FlowProblem box_problem(const GridSpec& grid, double lid, const Point& force) {
    FlowProblem pb = cavity_problem(grid, lid);
    if (force[0] != 0.0 || force[1] != 0.0 || force[2] != 0.0) pb.forcing = ForcingSpec::constant(force);
    return pb;
}

struct CavitySnapshot {
    double time = 0.0;
    Profile u_vertical;    ///< u(y) along x = 1/2
    Profile v_horizontal;  ///< v(x) along y = 1/2
};

/// Runs the cavity from rest, capturing centerline profiles at each requested time.
/// Aborts with NumericalError if the velocity stops being finite or exceeds
/// `blowup_factor` times the lid speed.
inline std::vector<CavitySnapshot> run_cavity(double re, int n, double tau, std::vector<double> times,
                                              SchemeConfig base = {}, Executor& exec = Executor::serial(),
                                              double lid = 1.0, double blowup_factor = 100.0) {
    if (!(re > 0.0)) throw ValidationError("Reynolds number must be positive");
    const int cells[] = {n, n};
    const GridSpec grid = GridSpec::build(2, cells);
    base.nu = 1.0 / re;
    base.tau = tau;
    base.advection = true;
    std::sort(times.begin(), times.end());
    base.end_time = times.empty() ? 0.0 : times.back();
    Stepper stepper(cavity_problem(grid, lid), base, exec);
    FlowState s = stepper.initialize();
    std::vector<CavitySnapshot> out;
    std::size_t next = 0;
    const double limit = blowup_factor * std::max(1.0, std::abs(lid));
    while (next < times.size()) {
        if (s.t >= times[next] - 1e-9 * tau) {
            out.push_back({s.t, component_profile(s.u, 0, 0.5, 1), component_profile(s.u, 1, 0.5, 0)});
            ++next;
            continue;
        }
        stepper.advance(s);
        if (max_abs(s.u) > limit)
            throw NumericalError("cavity run diverged at t = " + std::to_string(s.t));
    }
    return out;
}

// --- backward-facing step ----------------------------------------------------------

/// Fully developed inflow on the upper half of x = 0, peak 3/2 at y = 3/4.
inline double step_inflow(double y) { return y > 0.5 ? 24.0 * (y - 0.5) * (1.0 - y) : 0.0; }

/// 16 x 1 channel: parabolic inflow over the upper half of x = 0 (no-slip below),
/// no-slip on y = 0, 1, zero-Neumann velocity and p = 0 at x = 16.
inline FlowProblem step_problem(double h, double length = 16.0) {
    const int cells[] = {static_cast<int>(std::lround(length / h)), static_cast<int>(std::lround(1.0 / h))};
    const double extent[] = {length, 1.0};
    FlowProblem pb;
    pb.grid = GridSpec::build(2, cells, extent);
    pb.bcs = BoundarySpec::no_slip();
    pb.bcs.at(0, 0).value = [](int c, const Point& x, double) { return c == 0 ? step_inflow(x[1]) : 0.0; };
    auto& out = pb.bcs.at(0, 1);
    out.velocity = {BoundaryKind::NeumannZero, BoundaryKind::NeumannZero, BoundaryKind::NeumannZero};
    out.pressure_dirichlet = true;
    // Start from the developed channel profile carrying the inflow flux.
    pb.initial_velocity = [](int c, const Point& x) { return c == 0 ? 3.0 * x[1] * (1.0 - x[1]) : 0.0; };
    return pb;
}

struct Reattachment {
    std::optional<double> r;  ///< empty when the wall flow never turns positive again
};

/// Smallest x > 0 where the streamwise velocity on the first row above y = 0
/// changes from negative to nonnegative, by linear interpolation between faces.
inline Reattachment recirculation_length(const StaggeredVectorField& u) {
    const GridSpec& g = u.grid;
    const Array3& uc = u[0];
    const int nf = uc.extent(0);
    for (int i = 0; i + 1 < nf; ++i) {
        const double a = uc(i, 0, 0), b = uc(i + 1, 0, 0);
        if (a < 0.0 && b >= 0.0) {
            const double x0 = g.face(0, i), x1 = g.face(0, i + 1);
            return {x0 + (x1 - x0) * (-a) / (b - a)};
        }
    }
    return {};
}

struct StepOptions {
    double re = 100.0;
    double h = 0.01;
    double tau = 0.002;
    double steady_tol = 1e-6;
    double t_max = 200.0;
    double chi = 1.0;
    double step_height = 0.5;
    /// Called every `progress_every` steps with the current state (may be empty).
    std::function<void(const FlowState&)> progress;
    long progress_every = 1000;
};

struct RecirculationReport {
    double re = 0.0;
    std::optional<double> r;
    double s = 0.5;
    std::optional<double> r_over_s;
    long steady_steps = 0;  ///< steps taken until steadiness (or the cap)
    bool steady = false;

    /// re,r,s,r_over_s,steady_steps header and one data row; undefined lengths print as nan.
    void write_csv(std::ostream& os) const {
        os << "re,r,s,r_over_s,steady_steps\n" << std::setprecision(10);
        const auto opt = [&](const std::optional<double>& v) {
            if (v) os << *v;
            else os << "nan";
        };
        os << re << ',';
        opt(r);
        os << ',' << s << ',';
        opt(r_over_s);
        os << ',' << steady_steps << '\n';
    }
};

inline RecirculationReport run_backward_facing_step(const StepOptions& opt, Executor& exec = Executor::serial()) {
    if (!(opt.re > 0.0)) throw ValidationError("Reynolds number must be positive");
    SchemeConfig cfg;
    cfg.variant = Variant::PeacemanRachford;
    cfg.tau = opt.tau;
    cfg.nu = 1.0 / opt.re;
    cfg.chi = opt.chi;
    cfg.advection = true;
    cfg.end_time = opt.t_max;
    Stepper stepper(step_problem(opt.h), cfg, exec);
    FlowState s = stepper.initialize();
    RecirculationReport rep;
    rep.re = opt.re;
    rep.s = opt.step_height;
    const long cap = cfg.step_count();
    while (s.k < cap) {
        stepper.advance(s);
        if (max_abs(s.u) > 100.0) throw NumericalError("step run diverged at t = " + std::to_string(s.t));
        if (opt.progress && s.k % opt.progress_every == 0) opt.progress(s);
        if (steady_detect(s.u, s.u_prev, opt.tau, opt.steady_tol)) {
            rep.steady = true;
            break;
        }
    }
    rep.steady_steps = s.k;
    rep.r = recirculation_length(s.u).r;
    if (rep.r) rep.r_over_s = *rep.r / rep.s;
    return rep;
}

} // namespace dsplit
