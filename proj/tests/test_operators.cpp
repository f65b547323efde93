#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "dsplit/operators.hpp"
#include "dsplit/testing/oracles.hpp"

using namespace dsplit;
namespace oracle = dsplit::testing;

namespace {

constexpr double pi = std::numbers::pi;

GridSpec square(int n) {
    const int cells[] = {n, n};
    return GridSpec::build(2, cells);
}

GridSpec cube(int n) {
    const int cells[] = {n, n, n};
    return GridSpec::build(3, cells);
}

} // namespace

TEST(SecondDifference, SineModeIsDiscreteEigenvector) {
    const GridSpec g = cube(12);
    const auto v = oracle::sine_mode(g, {1, 2, 1});
    for (int a = 0; a < 3; ++a) {
        const double lam = oracle::second_difference_eigenvalue(g, a, a == 1 ? 2 : 1);
        const auto d = oracle::d2(v, a);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < v[c].size(); ++i)
                EXPECT_NEAR(d[c].raw()[i], lam * v[c].raw()[i], 1e-9) << "axis " << a << " comp " << c;
    }
}

TEST(SecondDifference, ApproximatesContinuousDerivative) {
    const GridSpec g = square(32);
    const auto v = StaggeredVectorField::sample(g, [](int, const Point& x) { return std::sin(pi * x[0]); });
    const BoundarySpec walls;
    for (int c = 0; c < 2; ++c) {
        const Array3 d = second_difference(v[c], c, 0, g, walls, nullptr);
        for (std::size_t i = 0; i < d.size(); ++i)
            EXPECT_NEAR(d.raw()[i], -pi * pi * v[c].raw()[i], 3e-3 * pi * pi) << c;
    }
}

TEST(SecondDifference, UsesWallData) {
    // u = x on the faces of a unit square: zero second difference along x when the
    // normal Dirichlet data at x = 1 is 1.
    const GridSpec g = square(8);
    const BoundarySpec spec = BoundarySpec::dirichlet([](int c, const Point& x, double) { return c == 0 ? x[0] : 0.0; }, false);
    const BoundaryValues bc(g, spec, 0.0);
    const auto u = StaggeredVectorField::sample(g, [](int c, const Point& x) { return c == 0 ? x[0] : 0.0; });
    const Array3 d = second_difference(u[0], 0, 0, g, spec, &bc);
    for (double v : d.raw()) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(Divergence, ExactOnLinearFields) {
    const GridSpec g = cube(6);
    const auto u = StaggeredVectorField::sample(g, [](int c, const Point& x) { return c == 0 ? 2.0 * x[0] : c == 1 ? 1.0 : -x[2]; });
    const ScalarField d = divergence(u);
    for (double v : d.values.raw()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Divergence, GradientIsNegativeAdjoint) {
    std::mt19937_64 rng(11);
    for (const GridSpec& g : {square(9), cube(5)}) {
        const ScalarField q = oracle::random_scalar(g, rng);
        const StaggeredVectorField u = oracle::random_velocity(g, rng);
        const double lhs = dot(gradient_to_faces(q), u);
        const double rhs = -dot(q, divergence(u));
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(Gradient, PressureDirichletFace) {
    const GridSpec g = square(4);
    BoundarySpec spec;
    spec.at(0, 1).pressure_dirichlet = true;
    const ScalarField p(g, 2.0);
    const auto grad = gradient_to_faces(p, &spec);
    EXPECT_DOUBLE_EQ(grad[0](4, 1), -2.0 / (0.5 * 0.25));
    EXPECT_DOUBLE_EQ(grad[0](0, 1), 0.0);
    EXPECT_DOUBLE_EQ(grad[0](2, 1), 0.0);
}

TEST(PenaltyOperator, CosineModeEigenpair) {
    const int n = 16;
    const GridSpec g = square(n);
    const double h = 1.0 / n;
    const ScalarField q = ScalarField::sample(g, [](const Point& x) { return std::cos(pi * x[0]) * std::cos(2.0 * pi * x[1]); });
    const double lx = (2.0 - 2.0 * std::cos(pi * h)) / (h * h);
    const double ly = (2.0 - 2.0 * std::cos(2.0 * pi * h)) / (h * h);
    const double mu = (1.0 + lx) * (1.0 + ly);
    const ScalarField aq = apply_A(q);
    const ScalarField sq = solve_A(q);
    for (std::size_t i = 0; i < q.values.size(); ++i) {
        EXPECT_NEAR(aq.values.raw()[i], mu * q.values.raw()[i], 1e-9 * mu);
        EXPECT_NEAR(sq.values.raw()[i], q.values.raw()[i] / mu, 1e-13);
    }
}

TEST(PenaltyOperator, SolveInvertsApplyOnZeroMeanData) {
    std::mt19937_64 rng(12);
    for (const GridSpec& g : {square(10), cube(6)}) {
        const ScalarField q = mean_zero_project(oracle::random_scalar(g, rng));
        const ScalarField back = solve_A(apply_A(q));
        double err = 0.0;
        for (std::size_t i = 0; i < q.values.size(); ++i) err = std::max(err, std::abs(back.values.raw()[i] - q.values.raw()[i]));
        EXPECT_LE(err, 1e-11);
        EXPECT_NEAR(mean(back), 0.0, 1e-14);
    }
}

TEST(PenaltyOperator, DirichletWallRoundtrip) {
    std::mt19937_64 rng(13);
    const int cells[] = {12, 6};
    const GridSpec g = GridSpec::build(2, cells);
    BoundarySpec spec;
    spec.at(0, 1).pressure_dirichlet = true;
    const PenaltyOperator a(g, spec);
    EXPECT_FALSE(a.neumann_only());
    const ScalarField q = oracle::random_scalar(g, rng);
    const ScalarField back = a.solve(a.apply(q));
    for (std::size_t i = 0; i < q.values.size(); ++i) EXPECT_NEAR(back.values.raw()[i], q.values.raw()[i], 1e-11);
}

TEST(PenaltyOperator, DominatesGradientNorm) {
    std::mt19937_64 rng(14);
    for (const GridSpec& g : {square(8), cube(5)}) {
        for (int trial = 0; trial < 5; ++trial) {
            const ScalarField q = oracle::random_scalar(g, rng);
            EXPECT_LE(gradient_norm_squared(q), dot(apply_A(q), q));
        }
    }
}

TEST(PenaltyOperator, ConstantsMapToZeroMeanSolution) {
    const GridSpec g = square(6);
    const ScalarField one(g, 1.0);
    const ScalarField a = apply_A(one);
    for (double v : a.values.raw()) EXPECT_DOUBLE_EQ(v, 1.0);
    const ScalarField zero = solve_A(one);
    for (double v : zero.values.raw()) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(BInner, MatchesContinuousValue) {
    // v = (sin(pi x) sin(pi y), 0): integral of (d_xy v)^2 is pi^4 / 4.
    const GridSpec g = square(32);
    const auto v = StaggeredVectorField::sample(g, [](int c, const Point& x) {
        return c == 0 ? std::sin(pi * x[0]) * std::sin(pi * x[1]) : 0.0;
    });
    EXPECT_NEAR(b_inner(v, 0.0), std::pow(pi, 4) / 4.0, 0.02 * std::pow(pi, 4) / 4.0);
}

TEST(BInner, EqualsOperatorInnerProduct) {
    std::mt19937_64 rng(15);
    for (const GridSpec& g : {square(7), cube(5)}) {
        const StaggeredVectorField v = oracle::random_velocity(g, rng);
        const double theta = 0.013;
        const double lhs = b_inner(v, 2.0 * theta);
        const double rhs = dot(v, oracle::b_operator(v, theta));
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(rhs)) << g.dim;
        EXPECT_GE(lhs, 0.0);
    }
}

TEST(Reductions, DotNormAndMean) {
    const GridSpec g = square(4);
    const ScalarField a(g, 2.0), b(g, 3.0);
    EXPECT_DOUBLE_EQ(dot(a, b), 6.0);
    EXPECT_DOUBLE_EQ(l2_norm(a), 2.0);
    ScalarField c = ScalarField::sample(g, [](const Point& x) { return x[0]; });
    EXPECT_NEAR(mean(c), 0.5, 1e-15);
    EXPECT_NEAR(mean(mean_zero_project(c)), 0.0, 1e-15);
}
