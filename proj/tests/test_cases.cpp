#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "dsplit/cases.hpp"

using namespace dsplit;

namespace {

GridSpec channel(int nx, int ny, double lx, double ly) {
    const int cells[] = {nx, ny};
    const double extent[] = {lx, ly};
    return GridSpec::build(2, cells, extent);
}

} // namespace

TEST(Recirculation, LinearCrossingIsExact) {
    const GridSpec g = channel(320, 20, 16.0, 1.0);
    const auto u = StaggeredVectorField::sample(g, [](int c, const Point& x) { return c == 0 ? x[0] - 1.61 : 0.0; });
    const auto r = recirculation_length(u);
    ASSERT_TRUE(r.r.has_value());
    EXPECT_NEAR(*r.r, 1.61, 1e-12);
}

TEST(Recirculation, FirstCrossingOnly) {
    const GridSpec g = channel(160, 10, 16.0, 1.0);
    const auto u = StaggeredVectorField::sample(g, [](int c, const Point& x) {
        return c == 0 ? -std::sin(x[0] - 0.05) : 0.0;
    });
    // Positive at x = 0, negative from 0.05, nonnegative again at pi + 0.05.
    const auto r = recirculation_length(u);
    ASSERT_TRUE(r.r.has_value());
    EXPECT_NEAR(*r.r, std::numbers::pi + 0.05, 2e-3);
}

TEST(Recirculation, AllPositiveFlowHasNoLength) {
    const GridSpec g = channel(32, 4, 16.0, 1.0);
    const StaggeredVectorField u(g, 1.0);
    EXPECT_FALSE(recirculation_length(u).r.has_value());
}

TEST(SteadyDetect, Threshold) {
    const GridSpec g = channel(4, 4, 1.0, 1.0);
    const StaggeredVectorField a(g, 1.0);
    EXPECT_TRUE(steady_detect(a, a, 0.01, 1e-6));
    StaggeredVectorField b = a;
    b[1](2, 2) += 2.0 * 1e-6 * 0.01;
    EXPECT_FALSE(steady_detect(b, a, 0.01, 1e-6));
    b[1](2, 2) = 1.0 + 0.5 * 1e-6 * 0.01;
    EXPECT_TRUE(steady_detect(b, a, 0.01, 1e-6));
}

TEST(SteadyDetect, DecayingTransientCrossesOnce) {
    const GridSpec g = channel(3, 3, 1.0, 1.0);
    const double tau = 0.1;
    int crossings = 0;
    bool was = false;
    for (int k = 1; k < 1000; ++k) {
        const StaggeredVectorField prev(g, std::exp(-0.1 * (k - 1) * tau));
        const StaggeredVectorField next(g, std::exp(-0.1 * k * tau));
        const bool now = steady_detect(next, prev, tau, 1e-3);
        if (now && !was) ++crossings;
        EXPECT_FALSE(was && !now);
        was = now;
    }
    EXPECT_EQ(crossings, 1);
}

TEST(Profile, InterpolatesAndExtrapolates) {
    Profile p;
    p.coord = {0.0, 1.0, 2.0};
    p.value = {0.0, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(p.at(0.5), 1.0);
    EXPECT_DOUBLE_EQ(p.at(1.5), 2.5);
    EXPECT_DOUBLE_EQ(p.at(-1.0), -2.0);
    EXPECT_DOUBLE_EQ(p.at(3.0), 4.0);
    std::ostringstream os;
    p.write_csv(os);
    EXPECT_EQ(os.str(), "coord,value\n0,0\n1,2\n2,3\n");
    Profile q = p;
    q.value[1] = 2.25;
    EXPECT_DOUBLE_EQ(profile_distance(p, q), 0.25);
}

TEST(Profile, CenterlineOfLinearField) {
    const GridSpec g = channel(8, 8, 1.0, 1.0);
    const auto u = StaggeredVectorField::sample(g, [](int c, const Point& x) { return c == 0 ? x[1] : -x[0]; });
    const Profile pu = component_profile(u, 0, 0.5, 1);
    ASSERT_EQ(pu.coord.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(pu.value[i], pu.coord[i]);
    const Profile pv = component_profile(u, 1, 0.5, 0);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(pv.value[i], -pv.coord[i]);
    EXPECT_THROW(component_profile(u, 0, 0.5, 0), ValidationError);
}

TEST(StepGeometry, InflowAndOutflow) {
    const FlowProblem pb = step_problem(0.01);
    EXPECT_EQ(pb.grid.n[0], 1600);
    EXPECT_EQ(pb.grid.n[1], 100);
    EXPECT_DOUBLE_EQ(step_inflow(0.75), 1.5);
    EXPECT_DOUBLE_EQ(step_inflow(0.25), 0.0);
    const BoundaryValues bc(pb.grid, pb.bcs, 0.0);
    const Array3& inflow = bc.plane(0, 0, 0);
    double flux = 0.0;
    for (double v : inflow.raw()) flux += v * pb.grid.h[1];
    EXPECT_NEAR(flux, 0.5, 2e-4);
    EXPECT_TRUE(pb.bcs.at(0, 1).pressure_dirichlet);
    for (int c = 0; c < 2; ++c) EXPECT_EQ(pb.bcs.kind(0, 1, c), BoundaryKind::NeumannZero);
    EXPECT_EQ(pb.bcs.kind(1, 0, 0), BoundaryKind::Dirichlet);
    // The initial field carries the same flux through every section.
    double init = 0.0;
    for (int j = 0; j < pb.grid.n[1]; ++j) init += pb.initial_velocity(0, {5.0, pb.grid.cell_center(1, j), 0.0}) * pb.grid.h[1];
    EXPECT_NEAR(init, 0.5, 2e-4);
}

TEST(StepRun, ShortCoarseRunProducesReport) {
    StepOptions o;
    o.h = 0.1;
    o.tau = 0.02;
    o.t_max = 2.0;
    o.re = 50.0;
    long calls = 0;
    o.progress = [&](const FlowState&) { ++calls; };
    o.progress_every = 10;
    const RecirculationReport r = run_backward_facing_step(o);
    EXPECT_EQ(r.steady_steps, 100);
    EXPECT_FALSE(r.steady);
    EXPECT_EQ(calls, 10);
    EXPECT_DOUBLE_EQ(r.s, 0.5);
    if (r.r) {
        EXPECT_DOUBLE_EQ(*r.r_over_s, *r.r / 0.5);
    }
    o.re = -1.0;
    EXPECT_THROW(run_backward_facing_step(o), ValidationError);
}

TEST(StepReport, CsvWithMissingLength) {
    RecirculationReport r;
    r.re = 100.0;
    r.steady_steps = 42;
    std::ostringstream os;
    r.write_csv(os);
    EXPECT_EQ(os.str(), "re,r,s,r_over_s,steady_steps\n100,nan,0.5,nan,42\n");
    r.r = 1.6;
    r.r_over_s = 3.2;
    std::ostringstream os2;
    r.write_csv(os2);
    EXPECT_EQ(os2.str(), "re,r,s,r_over_s,steady_steps\n100,1.6,0.5,3.2,42\n");
}

TEST(Cavity, ConservesMassAndRecordsSnapshots) {
    SchemeConfig base;
    const auto snaps = run_cavity(100.0, 16, 0.02, {0.2, 0.1}, base);
    ASSERT_EQ(snaps.size(), 2u);
    EXPECT_NEAR(snaps[0].time, 0.1, 1e-12);
    EXPECT_NEAR(snaps[1].time, 0.2, 1e-12);
    EXPECT_EQ(snaps[0].u_vertical.coord.size(), 16u);

    const int cells[] = {16, 16};
    const GridSpec g = GridSpec::build(2, cells);
    base.nu = 0.01;
    base.tau = 0.02;
    base.advection = true;
    const Stepper st(cavity_problem(g), base);
    FlowState s = st.initialize();
    for (int k = 0; k < 20; ++k) {
        st.advance(s);
        double total = 0.0;
        const ScalarField div = divergence(s.u);
        for (double v : div.values.raw()) total += v;
        EXPECT_LE(std::abs(total) * g.cell_volume(), 1e-12);
    }
    // The lid drags the fluid near y = 1 forward.
    EXPECT_GT(s.u[0](8, 15), 0.1);
}

TEST(Cavity, BlowupGuardAndInputChecks) {
    EXPECT_THROW(run_cavity(100.0, 8, 0.05, {1.0}, {}, Executor::serial(), 1.0, 1e-6), NumericalError);
    EXPECT_THROW(run_cavity(0.0, 8, 0.05, {1.0}), ValidationError);
}

TEST(BoxProblem, ForceAndLid) {
    const int cells[] = {4, 4};
    const GridSpec g = GridSpec::build(2, cells);
    const FlowProblem pb = box_problem(g, 0.0, {1.0, -2.0, 0.0});
    EXPECT_FALSE(pb.bcs.at(1, 1).value);
    const auto f = sample_forcing(pb.forcing, 0.0, g);
    EXPECT_DOUBLE_EQ(f[1](1, 1), -2.0);
    EXPECT_TRUE(box_problem(g, 0.5, {0.0, 0.0, 0.0}).forcing.is_zero());
}
