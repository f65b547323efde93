#include <gtest/gtest.h>

#include <limits>
#include <numbers>
#include <random>

#include "dsplit/scheme.hpp"
#include "dsplit/testing/oracles.hpp"
#include "dsplit/verification.hpp"

using namespace dsplit;
namespace oracle = dsplit::testing;

namespace {

constexpr double pi = std::numbers::pi;

GridSpec grid_of(int dim, int n) {
    const int cells[] = {n, n, n};
    return GridSpec::build(dim, std::span<const int>(cells, static_cast<std::size_t>(dim)));
}

ForcingSpec smooth_force() {
    return {[](int c, const Point& x, double t) { return std::sin(2.0 * x[0] + c) * std::cos(3.0 * x[1] - t) + 0.3 * x[2]; }};
}

FlowProblem smooth_wall_problem(const GridSpec& g) {
    FlowProblem pb;
    pb.grid = g;
    pb.forcing = smooth_force();
    pb.initial_velocity = [dim = g.dim](int c, const Point& x) {
        double v = 1.0 + 0.5 * c;
        for (int a = 0; a < dim; ++a) v *= std::sin(pi * x[static_cast<std::size_t>(a)]);
        return v;
    };
    pb.initial_pressure = [](const Point& x) { return std::cos(pi * x[0]) + x[1] * x[1]; };
    return pb;
}

/// One unsplit Crank-Nicolson step with homogeneous walls, solved densely:
/// (I/tau - nu/2 L) u1 = (I/tau + nu/2 L) u0 - grad p* + f.
StaggeredVectorField unsplit_cn_step(const StaggeredVectorField& u0, const ScalarField& p_star,
                                     const StaggeredVectorField& f, double nu, double tau) {
    std::vector<std::pair<int, std::size_t>> unknowns;
    for (int c = 0; c < u0.dim(); ++c)
        for (std::size_t flat = 0; flat < u0[c].size(); ++flat)
            if (oracle::is_unknown(u0, c, u0[c].unravel(flat))) unknowns.emplace_back(c, flat);
    const std::size_t n = unknowns.size();
    oracle::Matrix m(n, std::vector<double>(n, 0.0));
    StaggeredVectorField e(u0.grid);
    for (std::size_t j = 0; j < n; ++j) {
        e[unknowns[j].first].raw()[unknowns[j].second] = 1.0;
        const StaggeredVectorField col = oracle::laplacian(e);
        e[unknowns[j].first].raw()[unknowns[j].second] = 0.0;
        for (std::size_t i = 0; i < n; ++i) m[i][j] = -0.5 * nu * col[unknowns[i].first].raw()[unknowns[i].second];
        m[j][j] += 1.0 / tau;
    }
    StaggeredVectorField rhs = oracle::laplacian(u0);
    scale(0.5 * nu, rhs);
    axpy(1.0 / tau, u0, rhs);
    axpy(-1.0, gradient_to_faces(p_star), rhs);
    axpy(1.0, f, rhs);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = rhs[unknowns[i].first].raw()[unknowns[i].second];
    const auto x = oracle::dense_lu_solve(std::move(m), std::move(b));
    StaggeredVectorField u1(u0.grid);
    for (std::size_t i = 0; i < n; ++i) u1[unknowns[i].first].raw()[unknowns[i].second] = x[i];
    return u1;
}

/// max |split - unsplit| / tau^3 for one step from the smooth initial state.
double splitting_constant(int dim, int n, Variant v, double tau) {
    SchemeConfig cfg;
    cfg.variant = v;
    cfg.tau = tau;
    cfg.nu = 1.0;
    const Stepper stepper(smooth_wall_problem(grid_of(dim, n)), cfg);
    FlowState s = stepper.initialize();
    const ScalarField p_star = stepper.pressure_predictor(s);
    const StaggeredVectorField f = stepper.explicit_source(s);
    const StaggeredVectorField reference = unsplit_cn_step(s.u, p_star, f, cfg.nu, tau);
    stepper.advance(s);
    StaggeredVectorField d = s.u;
    axpy(-1.0, reference, d);
    return max_abs(d) / (tau * tau * tau);
}

double max_residual(int dim, int n, Variant v, double tau, int steps) {
    SchemeConfig cfg;
    cfg.variant = v;
    cfg.tau = tau;
    cfg.nu = 0.6;
    std::mt19937_64 rng(static_cast<unsigned>(dim * 100 + static_cast<int>(v)));
    FlowProblem pb = smooth_wall_problem(grid_of(dim, n));
    const Stepper stepper(pb, cfg);
    FlowState s = stepper.initialize();
    s.u = oracle::random_velocity(pb.grid, rng);
    double worst = 0.0;
    for (int k = 0; k < steps; ++k) {
        const bool bdf = stepper.uses_bdf2_step(s);
        const ScalarField p_star = stepper.pressure_predictor(s);
        const StaggeredVectorField f = stepper.explicit_source(s);
        const StaggeredVectorField u0 = s.u, um = s.u_prev;
        stepper.advance(s);
        const auto r = bdf ? oracle::bdf2_split_residual(um, u0, s.u, p_star, f, cfg.nu, tau)
                           : oracle::cn_split_residual(u0, s.u, p_star, f, cfg.nu, tau);
        worst = std::max(worst, r.relative());
    }
    return worst;
}

} // namespace

TEST(Stepper, PeacemanRachfordSatisfiesCombinedForm) { EXPECT_LE(max_residual(2, 12, Variant::PeacemanRachford, 0.05, 10), 1e-10); }

TEST(Stepper, DouglasSatisfiesCombinedForm2d) { EXPECT_LE(max_residual(2, 12, Variant::Douglas, 0.05, 10), 1e-10); }

TEST(Stepper, DouglasSatisfiesCombinedForm3d) { EXPECT_LE(max_residual(3, 6, Variant::Douglas, 0.05, 10), 1e-10); }

TEST(Stepper, Bdf2SatisfiesEliminatedForm) {
    EXPECT_LE(max_residual(3, 6, Variant::Bdf2, 0.05, 10), 1e-10);
    EXPECT_LE(max_residual(2, 10, Variant::Bdf2, 0.1, 10), 1e-10);
}

TEST(Stepper, SplittingErrorIsThirdOrderPerStep3d) {
    const double c1 = splitting_constant(3, 8, Variant::Douglas, 4e-4);
    const double c2 = splitting_constant(3, 8, Variant::Douglas, 2e-4);
    EXPECT_GT(c1, 0.0);
    EXPECT_NEAR(c2 / c1, 1.0, 0.2) << "C(tau)=" << c1 << " C(tau/2)=" << c2;
}

TEST(Stepper, SplittingErrorIsThirdOrderPerStep2d) {
    const double c1 = splitting_constant(2, 16, Variant::PeacemanRachford, 2e-4);
    const double c2 = splitting_constant(2, 16, Variant::PeacemanRachford, 1e-4);
    EXPECT_GT(c1, 0.0);
    EXPECT_NEAR(c2 / c1, 1.0, 0.2) << "C(tau)=" << c1 << " C(tau/2)=" << c2;
}

TEST(Stepper, PeacemanRachfordAgreesWithDouglasIn2d) {
    const FlowProblem pb = smooth_wall_problem(grid_of(2, 14));
    SchemeConfig a;
    a.variant = Variant::PeacemanRachford;
    a.tau = 0.02;
    SchemeConfig b = a;
    b.variant = Variant::Douglas;
    const Stepper sa(pb, a), sb(pb, b);
    FlowState xa = sa.initialize(), xb = sb.initialize();
    for (int k = 0; k < 20; ++k) {
        sa.advance(xa);
        sb.advance(xb);
    }
    StaggeredVectorField d = xa.u;
    axpy(-1.0, xb.u, d);
    EXPECT_LE(max_abs(d), 1e-12 * max_abs(xa.u));
}

TEST(Stepper, PressurePredictorFormulas) {
    const FlowProblem pb = smooth_wall_problem(grid_of(2, 6));
    SchemeConfig cfg;
    cfg.variant = Variant::Bdf2;
    const Stepper st(pb, cfg);
    FlowState s = st.initialize();
    s.p = ScalarField(pb.grid, 1.0);
    s.phi = ScalarField::sample(pb.grid, [](const Point& x) { return x[0] - 0.5; });
    s.phi_prev = ScalarField::sample(pb.grid, [](const Point& x) { return x[1] - 0.5; });
    // Startup step (k = 0): p + phi, then zero mean.
    const ScalarField first = st.pressure_predictor(s);
    const ScalarField expect_first = mean_zero_project(ScalarField::sample(pb.grid, [](const Point& x) { return 1.0 + x[0] - 0.5; }));
    for (std::size_t i = 0; i < first.values.size(); ++i)
        EXPECT_NEAR(first.values.raw()[i], expect_first.values.raw()[i], 1e-14);
    s.k = 1;
    s.has_u_prev = true;
    const ScalarField later = st.pressure_predictor(s);
    const ScalarField expect = ScalarField::sample(pb.grid, [](const Point& x) { return 4.0 / 3.0 * (x[0] - 0.5) - 1.0 / 3.0 * (x[1] - 0.5); });
    for (std::size_t i = 0; i < later.values.size(); ++i) EXPECT_NEAR(later.values.raw()[i], expect.values.raw()[i], 1e-14);
}

TEST(Stepper, PenaltyStepSolvesFactorizedSystem) {
    std::mt19937_64 rng(21);
    const FlowProblem pb = smooth_wall_problem(grid_of(3, 6));
    SchemeConfig cfg;
    cfg.variant = Variant::Douglas;
    cfg.tau = 0.03;
    const Stepper st(pb, cfg);
    const StaggeredVectorField u = oracle::random_velocity(pb.grid, rng);
    const ScalarField phi = st.penalty_step(u, 1.0 / cfg.tau);
    ScalarField lhs = apply_A(phi);
    ScalarField rhs = divergence(u);
    scale(-1.0 / cfg.tau, rhs);
    const double tol = 1e-12 * max_abs(rhs);
    for (std::size_t i = 0; i < lhs.values.size(); ++i) EXPECT_NEAR(lhs.values.raw()[i], rhs.values.raw()[i], tol);
}

TEST(Stepper, PressureUpdateStandardAndRotational) {
    std::mt19937_64 rng(22);
    const FlowProblem pb = smooth_wall_problem(grid_of(2, 8));
    SchemeConfig cfg;
    cfg.nu = 0.3;
    cfg.chi = 0.0;
    const Stepper standard(pb, cfg);
    cfg.chi = 0.5;
    const Stepper rotational(pb, cfg);
    const ScalarField p = mean_zero_project(oracle::random_scalar(pb.grid, rng));
    const ScalarField phi = mean_zero_project(oracle::random_scalar(pb.grid, rng));
    const StaggeredVectorField u1 = oracle::random_velocity(pb.grid, rng);
    const StaggeredVectorField u0 = oracle::random_velocity(pb.grid, rng);
    const ScalarField a = standard.pressure_update(p, phi, u1, u0);
    const ScalarField b = rotational.pressure_update(p, phi, u1, u0);
    const ScalarField d1 = divergence(u1), d0 = divergence(u0);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        EXPECT_NEAR(a.values.raw()[i], p.values.raw()[i] + phi.values.raw()[i], 1e-14);
        const double rot = 0.5 * 0.3 * 0.5 * (d1.values.raw()[i] + d0.values.raw()[i]);
        EXPECT_NEAR(b.values.raw()[i], a.values.raw()[i] - rot, 1e-12);
    }
}

TEST(Stepper, FailedStepLeavesStateUntouched) {
    FlowProblem pb = smooth_wall_problem(grid_of(2, 8));
    pb.forcing.f = [](int, const Point&, double t) { return t > 0.22 ? std::numeric_limits<double>::quiet_NaN() : 1.0; };
    SchemeConfig cfg;
    cfg.tau = 0.1;
    const Stepper st(pb, cfg);
    FlowState s = st.initialize();
    st.advance(s);
    st.advance(s);
    const FlowState before = s;
    EXPECT_THROW(st.advance(s), NumericalError);
    EXPECT_EQ(s.k, before.k);
    EXPECT_EQ(s.t, before.t);
    for (int c = 0; c < 2; ++c) EXPECT_EQ(s.u[c], before.u[c]);
    EXPECT_EQ(s.p.values, before.p.values);
    EXPECT_EQ(s.phi.values, before.phi.values);
}

TEST(Stepper, RejectsInvalidConfiguration) {
    const FlowProblem pb2 = smooth_wall_problem(grid_of(2, 6));
    const FlowProblem pb3 = smooth_wall_problem(grid_of(3, 4));
    SchemeConfig cfg;
    EXPECT_THROW(Stepper(pb3, cfg), ValidationError);  // PR in 3D
    cfg.chi = 1.5;
    EXPECT_THROW(Stepper(pb2, cfg), ValidationError);
    cfg.chi = 1.0;
    cfg.tau = 0.0;
    EXPECT_THROW(Stepper(pb2, cfg), ValidationError);
    cfg.tau = 0.1;
    cfg.initial_phi = InitialPhi::Supplied;
    const Stepper st(pb2, cfg);
    EXPECT_THROW(st.initialize(), ValidationError);
}

TEST(Stepper, StepCountRoundsUp) {
    SchemeConfig cfg;
    cfg.end_time = 2.0;
    cfg.tau = 0.0125;
    EXPECT_EQ(cfg.step_count(), 160);
    cfg.tau = 0.3;
    EXPECT_EQ(cfg.step_count(), 7);
}

TEST(Stepper, Bdf2SteadyStateKeepsSpatialOrder) {
    // Steady Stokes solution: u = (sin x sin y, cos x cos y), p = cos x sin y.
    ManufacturedSolution m;
    m.dim = 2;
    m.nu = 1.0;
    m.velocity = [](int c, const Point& x, double) {
        return c == 0 ? std::sin(x[0]) * std::sin(x[1]) : std::cos(x[0]) * std::cos(x[1]);
    };
    m.pressure = [](const Point& x, double) { return std::cos(x[0]) * std::sin(x[1]); };
    m.forcing = [](int c, const Point& x, double) {
        return c == 0 ? 2.0 * std::sin(x[0]) * std::sin(x[1]) - std::sin(x[0]) * std::sin(x[1])
                      : 2.0 * std::cos(x[0]) * std::cos(x[1]) + std::cos(x[0]) * std::cos(x[1]);
    };
    SchemeConfig cfg;
    cfg.variant = Variant::Bdf2;
    cfg.tau = 0.05;
    cfg.end_time = 4.0;
    const double e16 = run_manufactured(m, grid_of(2, 16), cfg).e_u_l2;
    const double e32 = run_manufactured(m, grid_of(2, 32), cfg).e_u_l2;
    EXPECT_GE(std::log2(e16 / e32), 1.8) << e16 << " " << e32;
}
