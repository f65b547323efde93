#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "dsplit/boundary.hpp"
#include "dsplit/errors.hpp"
#include "dsplit/grid.hpp"
#include "dsplit/operators.hpp"
#include "dsplit/parallel.hpp"
#include "dsplit/physics.hpp"
#include "dsplit/tridiag.hpp"

namespace dsplit {

/// Momentum splitting. PeacemanRachford is two-dimensional only; Douglas and
/// Bdf2 sweep every axis of a 2D or 3D grid.
enum class Variant { PeacemanRachford, Douglas, Bdf2 };

/// How the pressure correction that seeds the first predictor is chosen.
enum class InitialPhi { Zero, Supplied };

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::PeacemanRachford: return "pr2d";
        case Variant::Douglas: return "douglas";
        case Variant::Bdf2: return "bdf2";
    }
    return "?";
}

struct SchemeConfig {
    Variant variant = Variant::PeacemanRachford;
    double tau = 0.01;
    double chi = 1.0;  ///< 0 = standard, (0, 1] = rotational
    double nu = 1.0;
    double end_time = 2.0;
    bool advection = false;
    InitialPhi initial_phi = InitialPhi::Zero;

    void validate(int dim) const {
        if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
        if (!(chi >= 0.0 && chi <= 1.0)) throw ValidationError("chi must lie in [0, 1]");
        if (!(nu > 0.0) || !std::isfinite(nu)) throw ValidationError("nu must be positive");
        if (!(end_time >= 0.0)) throw ValidationError("end time must be nonnegative");
        if (variant == Variant::PeacemanRachford && dim != 2)
            throw ValidationError("the Peaceman-Rachford splitting is two-dimensional only");
    }

    /// K = ceil(T / tau), tolerant of T being an exact multiple up to roundoff.
    long step_count() const { return static_cast<long>(std::ceil(end_time / tau - 1e-9)); }
};

/// Everything a run needs besides the scheme parameters.
struct FlowProblem {
    GridSpec grid;
    BoundarySpec bcs;
    ForcingSpec forcing;
    std::function<double(int, const Point&)> initial_velocity;  ///< empty: rest
    std::function<double(const Point&)> initial_pressure;      ///< empty: zero
    /// Initial pressure correction for InitialPhi::Supplied, given tau.
    std::function<ScalarField(const GridSpec&, double)> supplied_phi;
};

/// Time level k. For the Crank-Nicolson type splittings p and phi sit at
/// t - tau/2; for BDF2 they sit at t.
struct FlowState {
    StaggeredVectorField u;
    StaggeredVectorField u_prev;
    ScalarField p;
    ScalarField phi;
    ScalarField phi_prev;
    StaggeredVectorField advection_prev;
    bool has_u_prev = false;
    bool has_advection_prev = false;
    long k = 0;
    double t = 0.0;
};

/// Advances FlowState by one step of the direction-splitting scheme:
/// pressure predictor, split momentum update, penalty step, pressure update.
class Stepper {
public:
    Stepper(FlowProblem problem, SchemeConfig config, Executor& exec = Executor::serial())
        : problem_(std::move(problem)), config_(config), exec_(&exec),
          penalty_(problem_.grid, problem_.bcs, exec) {
        config_.validate(problem_.grid.dim);
        cn_ = build_solvers(0.5 * config_.nu * config_.tau);
        if (config_.variant == Variant::Bdf2) bdf_ = build_solvers(2.0 * config_.nu * config_.tau / 3.0);
        if (!problem_.bcs.time_dependent) steady_bc_ = BoundaryValues(problem_.grid, problem_.bcs, 0.0);
    }

    const SchemeConfig& config() const { return config_; }
    const FlowProblem& problem() const { return problem_; }
    const GridSpec& grid() const { return problem_.grid; }
    const PenaltyOperator& penalty_operator() const { return penalty_; }
    Executor& executor() const { return *exec_; }

    double pressure_time(const FlowState& s) const {
        return config_.variant == Variant::Bdf2 ? s.t : s.t - 0.5 * config_.tau;
    }

    BoundaryValues boundary_values(double t) const {
        if (steady_bc_) return *steady_bc_;
        return BoundaryValues(problem_.grid, problem_.bcs, t);
    }

    FlowState initialize() const {
        const GridSpec& g = problem_.grid;
        FlowState s;
        s.u = problem_.initial_velocity
                  ? StaggeredVectorField::sample(g, [&](int c, const Point& x) { return problem_.initial_velocity(c, x); })
                  : StaggeredVectorField(g);
        pin_normal_faces(s.u, problem_.bcs, boundary_values(0.0));
        s.p = problem_.initial_pressure ? ScalarField::sample(g, problem_.initial_pressure) : ScalarField(g);
        if (penalty_.neumann_only()) s.p = mean_zero_project(std::move(s.p));
        if (config_.initial_phi == InitialPhi::Supplied) {
            if (!problem_.supplied_phi)
                throw ValidationError("initial pressure correction policy 'supplied' needs a case that provides it");
            s.phi = problem_.supplied_phi(g, config_.tau);
            if (penalty_.neumann_only()) s.phi = mean_zero_project(std::move(s.phi));
        } else {
            s.phi = ScalarField(g);
        }
        s.phi_prev = ScalarField(g);
        s.u_prev = s.u;
        s.advection_prev = StaggeredVectorField(g);
        return s;
    }

    bool uses_bdf2_step(const FlowState& s) const { return config_.variant == Variant::Bdf2 && s.k > 0; }

    /// p* = p + phi, or p + 4/3 phi - 1/3 phi_prev for BDF2 steps.
    ScalarField pressure_predictor(const FlowState& s) const {
        ScalarField p = s.p;
        if (uses_bdf2_step(s)) {
            axpy(4.0 / 3.0, s.phi, p);
            axpy(-1.0 / 3.0, s.phi_prev, p);
        } else {
            axpy(1.0, s.phi, p);
        }
        return penalty_.neumann_only() ? mean_zero_project(std::move(p)) : p;
    }

    /// Peaceman-Rachford: x-implicit then y-implicit half steps. `source` is the
    /// explicit right-hand side at t + tau/2 (body force minus advection).
    StaggeredVectorField momentum_sweep_2d(const FlowState& s, const ScalarField& p_star,
                                           const StaggeredVectorField& source) const {
        if (problem_.grid.dim != 2) throw ValidationError("momentum_sweep_2d needs a 2D grid");
        const double tau = config_.tau;
        const double nu = config_.nu;
        const BoundaryValues g0 = boundary_values(s.t);
        const BoundaryValues g1 = boundary_values(s.t + tau);
        const BoundaryValues gh = BoundaryValues::combine(0.5, g0, 0.5, g1);
        const StaggeredVectorField grad = gradient_to_faces(p_star, &problem_.bcs);
        const double theta = 0.5 * nu * tau;

        StaggeredVectorField half = s.u;
        const int y_axis[] = {1};
        add_laplacian_part(0.5 * tau * nu, s.u, y_axis, problem_.bcs, &g0, half);
        axpy(-0.5 * tau, grad, half);
        axpy(0.5 * tau, source, half);
        implicit_sweep(half, 0, theta, cn_, gh);
        pin_normal_faces(half, problem_.bcs, gh);

        StaggeredVectorField next = half;
        const int x_axis[] = {0};
        add_laplacian_part(0.5 * tau * nu, half, x_axis, problem_.bcs, &gh, next);
        axpy(-0.5 * tau, grad, next);
        axpy(0.5 * tau, source, next);
        implicit_sweep(next, 1, theta, cn_, g1);
        pin_normal_faces(next, problem_.bcs, g1);
        return next;
    }

    /// Douglas splitting: explicit predictor with the full Laplacian, then one
    /// (1 - nu tau/2 d_aa) solve per axis on the increment against u^k.
    StaggeredVectorField momentum_sweep_3d(const FlowState& s, const ScalarField& p_star,
                                           const StaggeredVectorField& source) const {
        const double tau = config_.tau;
        const BoundaryValues g0 = boundary_values(s.t);
        const BoundaryValues g1 = boundary_values(s.t + tau);

        StaggeredVectorField xi = s.u;
        add_laplacian_part(tau * config_.nu, s.u, all_axes(), problem_.bcs, &g0, xi);
        axpy(-tau, gradient_to_faces(p_star, &problem_.bcs), xi);
        axpy(tau, source, xi);
        return increment_cascade(s.u, std::move(xi), 0.5 * config_.nu * tau, cn_, g0, g1);
    }

    /// Split BDF2: predictor from (4u^k - u^{k-1})/3, then per-axis
    /// (1 - 2 nu tau/3 d_aa) increment solves. `source` is taken at t + tau.
    StaggeredVectorField momentum_sweep_bdf2(const FlowState& s, const ScalarField& p_star,
                                             const StaggeredVectorField& source) const {
        if (!s.has_u_prev) throw ValidationError("BDF2 step needs the previous velocity level");
        if (!bdf_) throw ValidationError("stepper was not configured for BDF2");
        const double tau = config_.tau;
        const double c = 2.0 * tau / 3.0;
        const BoundaryValues g0 = boundary_values(s.t);
        const BoundaryValues g1 = boundary_values(s.t + tau);

        StaggeredVectorField xi = s.u;
        scale(4.0 / 3.0, xi);
        axpy(-1.0 / 3.0, s.u_prev, xi);
        add_laplacian_part(c * config_.nu, s.u, all_axes(), problem_.bcs, &g0, xi);
        axpy(-c, gradient_to_faces(p_star, &problem_.bcs), xi);
        axpy(c, source, xi);
        return increment_cascade(s.u, std::move(xi), c * config_.nu, *bdf_, g0, g1);
    }

    /// phi = A^{-1}(-factor * div u), factor = 1/tau or 3/(2 tau).
    ScalarField penalty_step(const StaggeredVectorField& u_new, double factor) const {
        ScalarField rhs = divergence(u_new);
        scale(-factor, rhs);
        return penalty_.solve(rhs);
    }

    /// p_new = p + phi - chi nu div((u_new + u_old)/2).
    ScalarField pressure_update(const ScalarField& p, const ScalarField& phi, const StaggeredVectorField& u_new,
                                const StaggeredVectorField& u_old) const {
        ScalarField out = p;
        axpy(1.0, phi, out);
        if (config_.chi != 0.0) {
            StaggeredVectorField avg = u_new;
            axpy(1.0, u_old, avg);
            scale(0.5, avg);
            axpy(-config_.chi * config_.nu, divergence(avg), out);
        }
        return penalty_.neumann_only() ? mean_zero_project(std::move(out)) : out;
    }

    /// Body force minus extrapolated advection at the time the momentum update needs.
    StaggeredVectorField explicit_source(const FlowState& s, StaggeredVectorField* advection_now = nullptr) const {
        const bool bdf = uses_bdf2_step(s);
        const double t_force = s.t + (bdf ? config_.tau : 0.5 * config_.tau);
        StaggeredVectorField source = sample_forcing(problem_.forcing, t_force, problem_.grid);
        if (config_.advection) {
            const BoundaryValues g0 = boundary_values(s.t);
            StaggeredVectorField n_k = advection_term(s.u, problem_.bcs, &g0, *exec_);
            if (!s.has_advection_prev) {
                axpy(-1.0, n_k, source);
            } else if (bdf) {
                axpy(-2.0, n_k, source);
                axpy(1.0, s.advection_prev, source);
            } else {
                axpy(-1.0, ab2_extrapolate(n_k, s.advection_prev), source);
            }
            if (advection_now) *advection_now = std::move(n_k);
        }
        return source;
    }

    /// Runs the four substeps. On failure the state is left untouched.
    void advance(FlowState& s) const {
        const bool bdf = uses_bdf2_step(s);
        ScalarField p_star = pressure_predictor(s);
        StaggeredVectorField n_k;
        StaggeredVectorField source = explicit_source(s, &n_k);

        StaggeredVectorField u_new;
        if (bdf) {
            u_new = momentum_sweep_bdf2(s, p_star, source);
        } else if (config_.variant == Variant::PeacemanRachford) {
            u_new = momentum_sweep_2d(s, p_star, source);
        } else {
            u_new = momentum_sweep_3d(s, p_star, source);
        }
        ScalarField phi = penalty_step(u_new, bdf ? 1.5 / config_.tau : 1.0 / config_.tau);
        ScalarField p = pressure_update(s.p, phi, u_new, s.u);

        if (!all_finite(u_new) || !all_finite(p) || !all_finite(phi))
            throw NumericalError("non-finite values at step " + std::to_string(s.k + 1) + " (t = " +
                                 std::to_string(s.t + config_.tau) + ")");

        s.u_prev = std::move(s.u);
        s.u = std::move(u_new);
        s.has_u_prev = true;
        s.phi_prev = std::move(s.phi);
        s.phi = std::move(phi);
        s.p = std::move(p);
        if (config_.advection) {
            s.advection_prev = std::move(n_k);
            s.has_advection_prev = true;
        }
        s.k += 1;
        s.t = static_cast<double>(s.k) * config_.tau;
    }

private:
    // solvers[c][a]: line system for component c swept along axis a.
    using SolverSet = std::array<std::array<LineSolver, 3>, 3>;

    SolverSet build_solvers(double theta) const {
        const GridSpec& g = problem_.grid;
        SolverSet set{};
        for (int c = 0; c < g.dim; ++c)
            for (int a = 0; a < g.dim; ++a) {
                const auto end = [&](int side) {
                    return problem_.bcs.kind(a, side, c) == BoundaryKind::Dirichlet ? LineEnd::Dirichlet
                                                                                    : LineEnd::NeumannZero;
                };
                set[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] = LineSolver(assemble_helmholtz_line(
                    g.n[static_cast<std::size_t>(a)], g.h[static_cast<std::size_t>(a)], theta, end(0), end(1),
                    c == a ? Staggering::FaceCentered : Staggering::CellCentered));
            }
        return set;
    }

    std::span<const int> all_axes() const {
        static constexpr int axes[] = {0, 1, 2};
        return std::span<const int>(axes, static_cast<std::size_t>(problem_.grid.dim));
    }

    /// Solves (1 - theta d_aa) x = r along `axis` for every component, with wall data
    /// `bc` on the two walls normal to `axis` folded into the right-hand side.
    void implicit_sweep(StaggeredVectorField& r, int axis, double theta, const SolverSet& solvers,
                        const BoundaryValues& bc) const {
        const GridSpec& g = problem_.grid;
        const double h = g.h[static_cast<std::size_t>(axis)];
        const double ghost_coeff = 2.0 * theta / (h * h);
        for (int c = 0; c < g.dim; ++c) {
            Array3& rc = r[c];
            for (int side = 0; side < 2; ++side) {
                if (problem_.bcs.kind(axis, side, c) != BoundaryKind::Dirichlet) continue;
                const Array3& plane = bc.plane(c, axis, side);
                const int pos = side == 0 ? 0 : rc.extent(axis) - 1;
                for (std::size_t flat = 0; flat < plane.size(); ++flat) {
                    Index3 idx = plane.unravel(flat);
                    idx[static_cast<std::size_t>(axis)] = pos;
                    if (c == axis)
                        rc[idx] = plane.raw()[flat];
                    else
                        rc[idx] += ghost_coeff * plane.raw()[flat];
                }
            }
            batch_solve(solvers[static_cast<std::size_t>(c)][static_cast<std::size_t>(axis)], rc, axis, *exec_);
        }
    }

    /// Shared tail of the Douglas and BDF2 updates: w = xi - u^k, then one
    /// implicit solve per axis on w with boundary increments g1 - g0.
    StaggeredVectorField increment_cascade(const StaggeredVectorField& u, StaggeredVectorField xi, double theta,
                                           const SolverSet& solvers, const BoundaryValues& g0,
                                           const BoundaryValues& g1) const {
        pin_normal_faces(xi, problem_.bcs, g1);
        const BoundaryValues dg = BoundaryValues::combine(1.0, g1, -1.0, g0);
        StaggeredVectorField w = std::move(xi);
        axpy(-1.0, u, w);
        for (int a = 0; a < problem_.grid.dim; ++a) {
            implicit_sweep(w, a, theta, solvers, dg);
            pin_normal_faces(w, problem_.bcs, dg);
        }
        axpy(1.0, u, w);
        pin_normal_faces(w, problem_.bcs, g1);
        return w;
    }

    FlowProblem problem_;
    SchemeConfig config_;
    Executor* exec_;
    PenaltyOperator penalty_;
    SolverSet cn_{};
    std::optional<SolverSet> bdf_;
    std::optional<BoundaryValues> steady_bc_;
};

} // namespace dsplit
