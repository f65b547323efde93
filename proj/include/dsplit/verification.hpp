#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "dsplit/operators.hpp"
#include "dsplit/scheme.hpp"

namespace dsplit {

/// Closed-form unsteady Stokes solution with the body force that drives it.
struct ManufacturedSolution {
    int dim = 2;
    double nu = 1.0;
    std::function<double(int, const Point&, double)> velocity;
    std::function<double(const Point&, double)> pressure;
    std::function<double(int, const Point&, double)> forcing;

    /// u = (sin x sin(y+t), cos x cos(y+t)), p = cos x sin(y+t).
    static ManufacturedSolution stokes_2d(double nu = 1.0) {
        ManufacturedSolution m;
        m.dim = 2;
        m.nu = nu;
        m.velocity = [](int c, const Point& x, double t) {
            return c == 0 ? std::sin(x[0]) * std::sin(x[1] + t) : std::cos(x[0]) * std::cos(x[1] + t);
        };
        m.pressure = [](const Point& x, double t) { return std::cos(x[0]) * std::sin(x[1] + t); };
        // f = u_t - nu lap u + grad p, with lap u = -2u.
        m.forcing = [nu](int c, const Point& x, double t) {
            const double s = std::sin(x[1] + t), co = std::cos(x[1] + t);
            if (c == 0) return std::sin(x[0]) * co + 2.0 * nu * std::sin(x[0]) * s - std::sin(x[0]) * s;
            return -std::cos(x[0]) * s + 2.0 * nu * std::cos(x[0]) * co + std::cos(x[0]) * co;
        };
        return m;
    }

    /// u_i = S_i(x) sin t with a solenoidal trigonometric S, p = cos(x+y+z+t).
    static ManufacturedSolution stokes_3d(double nu = 1.0) {
        ManufacturedSolution m;
        m.dim = 3;
        m.nu = nu;
        m.velocity = [](int c, const Point& x, double t) { return spatial_3d(c, x) * std::sin(t); };
        m.pressure = [](const Point& x, double t) { return std::cos(x[0] + x[1] + x[2] + t); };
        // lap S_i = -3 S_i; grad p = -sin(x+y+z+t) (1,1,1).
        m.forcing = [nu](int c, const Point& x, double t) {
            const double s = spatial_3d(c, x);
            return s * std::cos(t) + 3.0 * nu * s * std::sin(t) - std::sin(x[0] + x[1] + x[2] + t);
        };
        return m;
    }

    static double spatial_3d(int c, const Point& x) {
        const double sx = std::sin(x[0]), cx = std::cos(x[0]);
        const double sy = std::sin(x[1]), cy = std::cos(x[1]);
        const double sz = std::sin(x[2]), cz = std::cos(x[2]);
        switch (c) {
            case 0: return sx * cy * sz - sx * sy * cz;
            case 1: return sx * sy * cz - cx * sy * sz;
            default: return cx * sy * sz - sx * cy * sz;
        }
    }

    /// Dirichlet data from the exact velocity on every wall; p0 exact; the
    /// supplied initial correction is p(tau/2) - p(0).
    FlowProblem problem(const GridSpec& grid) const {
        if (grid.dim != dim) throw ValidationError("manufactured solution and grid dimensions differ");
        FlowProblem pb;
        pb.grid = grid;
        pb.bcs = BoundarySpec::dirichlet(velocity, true);
        pb.forcing.f = forcing;
        auto vel = velocity;
        auto pre = pressure;
        pb.initial_velocity = [vel](int c, const Point& x) { return vel(c, x, 0.0); };
        pb.initial_pressure = [pre](const Point& x) { return pre(x, 0.0); };
        pb.supplied_phi = [pre](const GridSpec& g, double tau) {
            return ScalarField::sample(g, [&](const Point& x) { return pre(x, 0.5 * tau) - pre(x, 0.0); });
        };
        return pb;
    }
};

struct ErrorReport {
    double e_u_l2 = 0.0;
    double e_p_l2 = 0.0;
    double e_div_l2 = 0.0;    ///< |div u|_{L2} at the final time
    double div_max_l2 = 0.0;  ///< max over steps k >= 1 of |div u^k|_{L2}
    double time = 0.0;
};

inline double l2_error_velocity(const StaggeredVectorField& u_h,
                                const std::function<double(int, const Point&, double)>& exact, double t) {
    const GridSpec& g = u_h.grid;
    double s = 0.0;
    for (int c = 0; c < g.dim; ++c) {
        const Array3& a = u_h[c];
        for (std::size_t flat = 0; flat < a.size(); ++flat) {
            const double d = a.raw()[flat] - exact(c, g.component_position(c, a.unravel(flat)), t);
            s += d * d;
        }
    }
    return std::sqrt(s * g.cell_volume());
}

/// Distance between the zero-mean representatives of p_h and the exact pressure.
inline double l2_error_pressure(const ScalarField& p_h, const std::function<double(const Point&, double)>& exact,
                                double t) {
    ScalarField e = ScalarField::sample(p_h.grid, [&](const Point& x) { return exact(x, t); });
    e = mean_zero_project(std::move(e));
    const ScalarField ph = mean_zero_project(p_h);
    axpy(-1.0, ph, e);
    return l2_norm(e);
}

/// Least-squares slope of log(error) against log(tau) over rows with positive
/// errors; empty when fewer than two rows qualify.
inline std::optional<double> fit_rate(std::span<const double> taus, std::span<const double> errors) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < taus.size() && i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !std::isfinite(errors[i]) || !(taus[i] > 0.0)) continue;
        const double x = std::log(taus[i]), y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return std::nullopt;
    const double den = m * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    return (m * sxy - sx * sy) / den;
}

struct ConvergenceRow {
    double tau = 0.0;
    double e_u = 0.0;
    double e_p = 0.0;
    double e_div = 0.0;  ///< max over steps of |div u^k|_{L2}
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    /// Error of the extra run at tau_min / 2 per column (u, p, div); rows whose
    /// error is below 3x this estimate are excluded from the fits.
    std::optional<ConvergenceRow> floor_run;
    std::optional<double> rate_u, rate_p, rate_div;

    static constexpr double floor_margin = 3.0;

    std::vector<double> column(int which) const {
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(which == 0 ? r.e_u : which == 1 ? r.e_p : r.e_div);
        return out;
    }

    /// Column values with rows too close to the spatial floor replaced by 0 (skipped by fit_rate).
    std::vector<double> usable(int which) const {
        std::vector<double> col = column(which);
        if (!floor_run) return col;
        const double f = which == 0 ? floor_run->e_u : which == 1 ? floor_run->e_p : floor_run->e_div;
        for (double& e : col)
            if (e < floor_margin * f) e = 0.0;
        return col;
    }

    void fit() {
        std::vector<double> taus;
        for (const auto& r : rows) taus.push_back(r.tau);
        rate_u = fit_rate(taus, usable(0));
        rate_p = fit_rate(taus, usable(1));
        rate_div = fit_rate(taus, usable(2));
    }

    /// tau,err_u_l2,err_p_l2,err_div_l2 rows plus a trailing rate comment.
    void write_csv(std::ostream& os) const {
        os << "tau,err_u_l2,err_p_l2,err_div_l2\n";
        os << std::setprecision(17);
        for (const auto& r : rows) os << r.tau << ',' << r.e_u << ',' << r.e_p << ',' << r.e_div << '\n';
        const auto fmt = [](const std::optional<double>& v) {
            if (!v) return std::string("nan");
            std::ostringstream s;
            s << std::setprecision(6) << *v;
            return s.str();
        };
        os << "# rate_u=" << fmt(rate_u) << " rate_p=" << fmt(rate_p) << " rate_div=" << fmt(rate_div) << '\n';
    }
};

inline void validate_tau_list(std::span<const double> taus) {
    if (taus.size() < 3) throw ValidationError("a convergence study needs at least 3 time steps");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] > 0.0)) throw ValidationError("time steps must be positive");
        if (i > 0 && !(taus[i] < taus[i - 1]))
            throw ValidationError("time steps must be strictly decreasing (no repeats)");
    }
}

/// max over k >= 1 of |div u^k|; zero when no step was taken.
struct DivergenceHistory {
    double max_l2 = 0.0;
    void record(const StaggeredVectorField& u) { max_l2 = std::max(max_l2, l2_norm(divergence(u))); }
};

/// Integrates a manufactured solution to the configured end time and compares.
inline ErrorReport run_manufactured(const ManufacturedSolution& mms, const GridSpec& grid, SchemeConfig config,
                                    Executor& exec = Executor::serial()) {
    config.nu = mms.nu;
    Stepper stepper(mms.problem(grid), config, exec);
    FlowState s = stepper.initialize();
    DivergenceHistory history;
    const long steps = config.step_count();
    for (long k = 0; k < steps; ++k) {
        stepper.advance(s);
        history.record(s.u);
    }
    ErrorReport r;
    r.time = s.t;
    r.e_u_l2 = l2_error_velocity(s.u, mms.velocity, s.t);
    r.e_p_l2 = l2_error_pressure(s.p, mms.pressure, stepper.pressure_time(s));
    r.e_div_l2 = l2_norm(divergence(s.u));
    r.div_max_l2 = history.max_l2;
    return r;
}

/// One run per tau plus a floor run at tau_min / 2. With more than one worker the
/// runs proceed concurrently, each internally serial.
inline ConvergenceTable convergence_study(const ManufacturedSolution& mms, const GridSpec& grid,
                                          const SchemeConfig& base, std::span<const double> taus, int workers = 1) {
    validate_tau_list(taus);
    std::vector<double> all(taus.begin(), taus.end());
    all.push_back(0.5 * taus.back());
    std::vector<ErrorReport> reports(all.size());
    std::vector<std::exception_ptr> errors(all.size());
    auto run_one = [&](std::size_t i) {
        try {
            SchemeConfig cfg = base;
            cfg.tau = all[i];
            reports[i] = run_manufactured(mms, grid, cfg);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (workers <= 1) {
        for (std::size_t i = 0; i < all.size(); ++i) run_one(i);
    } else {
        std::size_t next = 0;
        std::mutex m;
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i;
                    {
                        std::lock_guard lock(m);
                        if (next >= all.size()) return;
                        i = next++;
                    }
                    run_one(i);
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    ConvergenceTable table;
    for (std::size_t i = 0; i + 1 < all.size(); ++i)
        table.rows.push_back({all[i], reports[i].e_u_l2, reports[i].e_p_l2, reports[i].div_max_l2});
    const auto& f = reports.back();
    table.floor_run = ConvergenceRow{all.back(), f.e_u_l2, f.e_p_l2, f.div_max_l2};
    table.fit();
    return table;
}

} // namespace dsplit
