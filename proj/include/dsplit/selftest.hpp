#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "dsplit/operators.hpp"
#include "dsplit/scheme.hpp"
#include "dsplit/testing/oracles.hpp"

namespace dsplit {

struct PropertyResult {
    std::string name;
    double value = 0.0;  ///< measured quantity
    double limit = 0.0;  ///< pass when value <= limit
    bool pass = false;
    std::string detail;
};

namespace detail {

inline PropertyResult check(std::string name, double value, double limit, std::string detail = {}) {
    return {std::move(name), value, limit, std::isfinite(value) && value <= limit, std::move(detail)};
}

inline GridSpec grid2(int nx, int ny, double lx = 1.0, double ly = 1.0) {
    const int c[] = {nx, ny};
    const double l[] = {lx, ly};
    return GridSpec::build(2, c, l);
}

inline GridSpec grid3(int nx, int ny, int nz, double lx = 1.0, double ly = 1.0, double lz = 1.0) {
    const int c[] = {nx, ny, nz};
    const double l[] = {lx, ly, lz};
    return GridSpec::build(3, c, l);
}

/// Smooth time-dependent body force for homogeneous-wall runs.
inline ForcingSpec smooth_forcing() {
    return {[](int c, const Point& x, double t) {
        return std::sin(2.0 * x[0] + c) * std::cos(3.0 * x[1] - t) + 0.5 * std::cos(x[2] + 1.7 * c);
    }};
}

inline FlowProblem wall_problem(const GridSpec& g, std::mt19937_64& rng, bool forced = true) {
    FlowProblem pb;
    pb.grid = g;
    pb.bcs = BoundarySpec::no_slip();
    if (forced) pb.forcing = smooth_forcing();
    const StaggeredVectorField u0 = testing::random_velocity(g, rng);
    // Look the random field back up by position (faces along c, centers elsewhere).
    pb.initial_velocity = [u0](int c, const Point& x) {
        const GridSpec& gg = u0.grid;
        Index3 idx{0, 0, 0};
        for (int a = 0; a < gg.dim; ++a) {
            const auto s = static_cast<std::size_t>(a);
            idx[s] = static_cast<int>(std::lround(a == c ? x[s] / gg.h[s] : x[s] / gg.h[s] - 0.5));
        }
        return u0[c][idx];
    };
    return pb;
}

// --- individual properties ---------------------------------------------------------

inline PropertyResult thomas_vs_dense(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double worst = 0.0;
    std::vector<TridiagonalSystem> systems;
    for (int n : {1, 2, 7, 50}) {
        TridiagonalSystem t(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < t.size(); ++i) {
            t.diag[i] = 4.0 + d(rng);
            if (i + 1 < t.size()) {
                t.lower[i] = d(rng);
                t.upper[i] = d(rng);
            }
        }
        systems.push_back(t);
    }
    for (auto st : {Staggering::CellCentered, Staggering::FaceCentered})
        for (auto l : {LineEnd::Dirichlet, LineEnd::NeumannZero})
            for (auto r : {LineEnd::Dirichlet, LineEnd::NeumannZero})
                systems.push_back(assemble_helmholtz_line(24, 1.0 / 24.0, 0.05, l, r, st));
    for (const auto& t : systems) {
        std::vector<double> b(t.size());
        for (double& v : b) v = d(rng);
        const auto x = thomas_solve(t, b);
        const auto y = testing::dense_lu_solve(testing::to_dense(t), b);
        double scale = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            scale = std::max(scale, std::abs(y[i]));
            diff = std::max(diff, std::abs(x[i] - y[i]));
        }
        worst = std::max(worst, diff / std::max(scale, 1e-300));
    }
    return check("thomas_vs_dense_lu", worst, 1e-12, "relative max difference");
}

inline PropertyResult a_coercivity(std::mt19937_64& rng) {
    // |grad q|^2 / <Aq, q> over 100 random fields; coercivity means it never exceeds 1.
    double worst = 0.0;
    const GridSpec grids[] = {grid2(16, 12, 1.0, 0.7), grid3(6, 5, 4)};
    for (int trial = 0; trial < 100; ++trial) {
        const GridSpec& g = grids[trial % 2];
        const ScalarField q = testing::random_scalar(g, rng);
        worst = std::max(worst, gradient_norm_squared(q) / dot(apply_A(q), q));
    }
    return check("a_coercivity", worst, 1.0, "max |grad q|^2 / <Aq,q> over 100 random fields");
}

inline PropertyResult a_roundtrip(std::mt19937_64& rng) {
    double worst = 0.0;
    BoundarySpec outflow;
    outflow.at(0, 1).pressure_dirichlet = true;
    const GridSpec g2 = grid2(20, 14, 2.0, 1.0), g3 = grid3(7, 6, 5);
    for (const auto& [g, spec] : {std::pair{g2, BoundarySpec{}}, std::pair{g3, BoundarySpec{}}, std::pair{g2, outflow}}) {
        const PenaltyOperator a(g, spec);
        ScalarField q = testing::random_scalar(g, rng);
        if (a.neumann_only()) q = mean_zero_project(std::move(q));
        ScalarField back = a.solve(a.apply(q));
        axpy(-1.0, q, back);
        worst = std::max(worst, max_abs(back) / max_abs(q));
    }
    return check("a_solve_apply_roundtrip", worst, 1e-10, "relative max error");
}

inline PropertyResult div_grad_adjoint(std::mt19937_64& rng) {
    double worst = 0.0;
    for (const GridSpec& g : {grid2(13, 9, 1.0, 0.6), grid3(5, 6, 4)}) {
        const StaggeredVectorField u = testing::random_velocity(g, rng);
        const ScalarField q = testing::random_scalar(g, rng);
        const double a = dot(divergence(u), q);
        const double b = dot(u, gradient_to_faces(q));
        worst = std::max(worst, std::abs(a + b) / (l2_norm(divergence(u)) * l2_norm(q) + l2_norm(u) * std::sqrt(gradient_norm_squared(q))));
    }
    return check("div_grad_adjoint", worst, 1e-12, "|<div u,q> + <u,grad q>| relative");
}

inline PropertyResult b_identity(std::mt19937_64& rng) {
    double worst = 0.0;
    const double theta = 0.3;  // b_inner takes nu*tau = 2 theta
    for (const GridSpec& g : {grid2(11, 8, 1.0, 0.8), grid3(5, 4, 6)}) {
        // Random field: sum-of-squares form against the operator form.
        const StaggeredVectorField v = testing::random_velocity(g, rng);
        const double lhs = b_inner(v, 2.0 * theta);
        const double rhs = dot(v, testing::b_operator(v, theta));
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
        // Eigenmode: closed-form value from the 1D eigenvalues.
        const std::array<int, 3> m{1, 2, 1};
        const StaggeredVectorField e = testing::sine_mode(g, m);
        double expect = 0.0;
        for (int c = 0; c < g.dim; ++c) {
            const double lx = testing::second_difference_eigenvalue(g, 0, m[0]);
            const double ly = testing::second_difference_eigenvalue(g, 1, m[1]);
            double lam = lx * ly;
            if (g.dim == 3) {
                const double lz = testing::second_difference_eigenvalue(g, 2, m[2]);
                lam += ly * lz + lz * lx - theta * lx * ly * lz;
            }
            double norm2 = 0.0;
            for (double x : e[c].raw()) norm2 += x * x;
            expect += lam * norm2 * g.cell_volume();
        }
        worst = std::max(worst, std::abs(b_inner(e, 2.0 * theta) - expect) / expect);
    }
    return check("b_inner_identity", worst, 1e-12, "relative error vs operator form and eigenmode");
}

struct RunTrace {
    double boundary = 0.0;   ///< max boundary trace relative to max |u|
    double residual = 0.0;   ///< max relative combined-form residual
    double mean_p = 0.0;     ///< max |mean p|, |mean phi|
};

/// Steps a homogeneous-wall forced problem, checking each step against the unsplit form.
inline RunTrace traced_run(const GridSpec& g, Variant v, double tau, int steps, std::mt19937_64& rng) {
    SchemeConfig cfg;
    cfg.variant = v;
    cfg.tau = tau;
    cfg.nu = 0.7;
    cfg.end_time = tau * steps;
    const Stepper stepper(wall_problem(g, rng), cfg);
    FlowState s = stepper.initialize();
    RunTrace tr;
    for (int k = 0; k < steps; ++k) {
        const bool bdf = stepper.uses_bdf2_step(s);
        const ScalarField p_star = stepper.pressure_predictor(s);
        const StaggeredVectorField f = stepper.explicit_source(s);
        const StaggeredVectorField u0 = s.u, um = s.u_prev;
        stepper.advance(s);
        const auto r = bdf ? testing::bdf2_split_residual(um, u0, s.u, p_star, f, cfg.nu, tau)
                           : testing::cn_split_residual(u0, s.u, p_star, f, cfg.nu, tau);
        tr.residual = std::max(tr.residual, r.relative());
        tr.boundary = std::max(tr.boundary, testing::boundary_trace_max(s.u, stepper.problem().bcs) / max_abs(s.u));
        tr.mean_p = std::max({tr.mean_p, std::abs(mean(s.p)), std::abs(mean(s.phi))});
    }
    return tr;
}

inline std::vector<PropertyResult> scheme_properties(std::mt19937_64& rng) {
    const GridSpec g2 = grid2(12, 10, 1.0, 0.8), g3 = grid3(6, 5, 7);
    const RunTrace pr = traced_run(g2, Variant::PeacemanRachford, 0.05, 50, rng);
    const RunTrace dg = traced_run(g3, Variant::Douglas, 0.05, 50, rng);
    const RunTrace bd = traced_run(g3, Variant::Bdf2, 0.05, 50, rng);
    const RunTrace bd2 = traced_run(g2, Variant::Bdf2, 0.1, 20, rng);
    std::vector<PropertyResult> out;
    out.push_back(check("boundary_recovery", std::max({pr.boundary, dg.boundary, bd.boundary}), 1e-11,
                        "wall traces over max |u|, 50 steps, 2D and 3D"));
    out.push_back(check("combined_form_residual", std::max(pr.residual, dg.residual), 1e-10,
                        "relative residual of the unsplit form, 2D and 3D"));
    out.push_back(check("bdf2_elimination_identity", std::max(bd.residual, bd2.residual), 1e-10,
                        "relative residual of the eliminated BDF2 form"));
    out.push_back(check("zero_mean_pressure", std::max({pr.mean_p, dg.mean_p, bd.mean_p}), 1e-12,
                        "max |mean p|, |mean phi| after each step"));
    return out;
}

inline PropertyResult zero_fixed_point() {
    double worst = 0.0;
    for (const auto& [g, v] : {std::pair{grid2(10, 8), Variant::PeacemanRachford}, std::pair{grid3(5, 4, 6), Variant::Douglas},
                               std::pair{grid3(5, 4, 6), Variant::Bdf2}}) {
        SchemeConfig cfg;
        cfg.variant = v;
        cfg.tau = 0.1;
        cfg.advection = true;
        FlowProblem pb;
        pb.grid = g;
        const Stepper stepper(pb, cfg);
        FlowState s = stepper.initialize();
        for (int k = 0; k < 10; ++k) stepper.advance(s);
        worst = std::max({worst, max_abs(s.u), max_abs(s.p), max_abs(s.phi)});
    }
    return check("zero_fixed_point", worst, 0.0, "max |u|, |p|, |phi| after 10 steps from rest");
}

inline PropertyResult large_tau_no_blowup(std::mt19937_64& rng) {
    double worst = 0.0;
    for (const auto& [g, v] : {std::pair{grid2(16, 16), Variant::PeacemanRachford}, std::pair{grid3(8, 8, 8), Variant::Douglas}}) {
        SchemeConfig cfg;
        cfg.variant = v;
        cfg.tau = 10.0;
        cfg.nu = 1.0;
        cfg.end_time = 1000.0;
        const StaggeredVectorField u0 = testing::random_solenoidal(g, rng);
        FlowProblem pb;
        pb.grid = g;
        const Stepper stepper(pb, cfg);
        FlowState s = stepper.initialize();
        s.u = u0;
        s.u_prev = u0;
        double running_min = l2_norm(s.u);
        for (int k = 0; k < 100; ++k) {
            stepper.advance(s);
            const double e = l2_norm(s.u);
            if (running_min > 0.0) worst = std::max(worst, e / running_min - 1.0);
            running_min = std::min(running_min, e);
        }
    }
    return check("large_tau_no_blowup", worst, 0.05, "max growth of |u| over its running minimum, tau = 10");
}

} // namespace detail

/// Runs every property; deterministic for a given seed.
inline std::vector<PropertyResult> run_selftest(std::uint64_t seed = 20240601) {
    std::mt19937_64 rng(seed);
    std::vector<PropertyResult> out;
    out.push_back(detail::thomas_vs_dense(rng));
    out.push_back(detail::a_coercivity(rng));
    out.push_back(detail::a_roundtrip(rng));
    out.push_back(detail::div_grad_adjoint(rng));
    out.push_back(detail::b_identity(rng));
    for (auto& r : detail::scheme_properties(rng)) out.push_back(std::move(r));
    out.push_back(detail::zero_fixed_point());
    out.push_back(detail::large_tau_no_blowup(rng));
    return out;
}

inline void print_results(std::ostream& os, const std::vector<PropertyResult>& results) {
    for (const auto& r : results)
        os << (r.pass ? "PASS " : "FAIL ") << r.name << " value=" << r.value << " limit=" << r.limit
           << (r.detail.empty() ? "" : "  (" + r.detail + ")") << '\n';
}

inline bool all_passed(const std::vector<PropertyResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

} // namespace dsplit
