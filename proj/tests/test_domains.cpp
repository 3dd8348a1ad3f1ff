#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "kahler/domain.hpp"
#include "kahler/grid.hpp"

using namespace kahler;

namespace {

Point point(std::initializer_list<double> xs) {
    Point p(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) p(i++) = x;
    return p;
}

Point random_in_ball(std::mt19937_64& rng, int n, double radius) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point p(2 * n);
    for (int k = 0; k < 2 * n; ++k) p(k) = normal(rng);
    // radius^2 uniform in [0, 0.99 R^2] keeps t away from zero.
    return p / p.norm() * radius * std::sqrt(0.99 * unit(rng));
}

}  // namespace

TEST(MakeDomain, UnitDisc) {
    const Domain d = make_domain(BallSpec{1, 1.0});
    EXPECT_EQ(d.kind(), DomainKind::ball);
    EXPECT_DOUBLE_EQ(d.phi_value(point({0.6, 0.8})), 0.0);
    EXPECT_DOUBLE_EQ(d.phi_value(point({0.0, 0.0})), -1.0);
    const auto e = d.phi(point({0.5, -0.25}));
    EXPECT_DOUBLE_EQ(e.gradient(0), 1.0);
    EXPECT_DOUBLE_EQ(e.gradient(1), -0.5);
    EXPECT_LT((e.hessian - 2.0 * Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-15);
}

TEST(MakeDomain, EllipsoidWeights) {
    const Domain d = make_domain(EllipsoidSpec{{1.0}, {4.0}});
    EXPECT_DOUBLE_EQ(d.phi_value(point({0.5, 0.25})), 0.25 + 0.25 - 1.0);
    const auto e = d.phi(point({0.1, 0.2}));
    Eigen::MatrixXd expected(2, 2);
    expected << 2, 0, 0, 8;
    EXPECT_LT((e.hessian - expected).norm(), 1e-15);
}

TEST(MakeDomain, RejectsBadSpecs) {
    EXPECT_THROW(make_domain(BallSpec{1, -1.0}), InvariantError);
    EXPECT_THROW(make_domain(BallSpec{3, 1.0}), InvariantError);
    EXPECT_THROW(make_domain(EllipsoidSpec{{1.0, 2.0}, {1.0}}), InvariantError);
    EXPECT_THROW(make_domain(EllipsoidSpec{{1.0}, {0.0}}), InvariantError);
}

TEST(MakeDomain, NonConvexCustomPhiNamesWitness) {
    CustomSpec spec;
    spec.n = 1;
    spec.half_widths = Eigen::VectorXd::Constant(2, 1.5);
    spec.phi = [](const Point& p) {
        PhiEvaluation e;
        const double x = p(0), y = p(1);
        e.value = std::pow(x, 4) + y * y - 1.0;
        e.gradient = Eigen::Vector2d(4 * x * x * x, 2 * y);
        e.hessian = Eigen::Matrix2d{{12 * x * x, 0.0}, {0.0, 2.0}};
        return e;
    };
    try {
        (void)make_domain(spec);
        FAIL() << "x^4 + y^2 - 1 must be rejected";
    } catch (const InvariantError& e) {
        const std::string msg = e.what();
        const auto open = msg.find("witness point (");
        ASSERT_NE(open, std::string::npos) << msg;
        std::istringstream is(msg.substr(open + 15));
        double x = 1.0, y = 0.0;
        is >> x >> y;
        EXPECT_EQ(x, 0.0) << msg;
        EXPECT_LE(x * x * x * x + y * y - 1.0, 1e-2) << msg;
    }
}

TEST(MakeDomain, ConvexCustomPhiAccepted) {
    CustomSpec spec;
    spec.n = 1;
    spec.half_widths = Eigen::VectorXd::Constant(2, 1.5);
    spec.phi = [](const Point& p) {
        PhiEvaluation e;
        e.value = p.squaredNorm() + 0.5 * p(0) * p(1) - 1.0;
        e.gradient = Eigen::Vector2d(2 * p(0) + 0.5 * p(1), 2 * p(1) + 0.5 * p(0));
        e.hessian = Eigen::Matrix2d{{2.0, 0.5}, {0.5, 2.0}};
        return e;
    };
    EXPECT_EQ(make_domain(spec).kind(), DomainKind::custom);
}

TEST(JInvariant, BallIsOneAndEllipsoidVaries) {
    const Domain ball = make_domain(BallSpec{2, 1.0});
    EXPECT_NEAR(j_invariant(ball, point({0.3, -0.1, 0.2, 0.4})), 1.0, 1e-14);
    // x^2 + 2 y^2 - 1 on the boundary: J = |phi_z|^2 - phi phi_{z zbar} = x^2 + 4 y^2.
    const Domain e = make_domain(EllipsoidSpec{{1.0}, {2.0}});
    EXPECT_NEAR(j_invariant(e, point({1.0, 0.0})), 1.0, 1e-14);
    EXPECT_NEAR(j_invariant(e, point({0.0, std::sqrt(0.5)})), 2.0, 1e-14);
}

TEST(BuildGrid, DiscMasks) {
    const Domain d = make_domain(BallSpec{1, 1.0});
    const auto g = build_grid(d, 1.0 / 32, 1.0 / 8);
    const auto& geo = g.grid.geometry;
    std::size_t expected_interior = 0;
    for (NodeIndex i = 0; i < geo.size(); ++i) {
        const Point p = geo.coordinates(i);
        const bool inside = p.squaredNorm() < 7.0 / 8.0;
        expected_interior += inside;
        EXPECT_EQ(g.grid.interior(i), inside);
        if (g.grid.interior(i))
            for (NodeIndex off : geo.stencil_offsets()) ASSERT_TRUE(g.grid.valued(i + off));
        if (g.grid.mask[static_cast<std::size_t>(i)] == NodeMask::dirichlet) EXPECT_LT(d.phi_value(p), 0.0);
    }
    EXPECT_EQ(g.grid.count(NodeMask::interior), expected_interior);
    EXPECT_NO_THROW(g.grid.validate());
}

TEST(BuildGrid, FourDimensionalBallStaysSmall) {
    const Domain d = make_domain(BallSpec{2, 1.0});
    const auto g = build_grid(d, 1.0 / 8, 0.5);
    EXPECT_LE(g.grid.geometry.size(), 33 * 33 * 33 * 33);
    EXPECT_GT(g.grid.count(NodeMask::interior), 0u);
}

TEST(BuildGrid, ResolvabilityInvariant) {
    const Domain d = make_domain(BallSpec{2, 1.0});
    // 2 h max|grad phi| = 2 (1/8) 2 sqrt(3/4) > 1/4.
    try {
        (void)build_grid(d, 1.0 / 8, 0.25);
        FAIL();
    } catch (const InvariantError& e) {
        EXPECT_NE(std::string(e.what()).find("epsilon > 2 h max|grad phi|"), std::string::npos) << e.what();
    }
    EXPECT_THROW(build_grid(make_domain(BallSpec{1, 1.0}), 1.0 / 32, 0.0), InvariantError);
}

TEST(BuildGrid, NodeCap) {
    const Domain d = make_domain(BallSpec{2, 1.0});
    EXPECT_THROW(build_grid(d, 1.0 / 8, 0.5, GridOptions{1000}), InvariantError);
}

TEST(BuildGrid, GridsNest) {
    const Domain d = make_domain(BallSpec{1, 1.0});
    const auto coarse = build_grid(d, 1.0 / 16, 0.25);
    const auto fine = build_grid(d, 1.0 / 32, 0.25);
    const auto nodes = coarse.grid.interior_nodes();
    for (NodeIndex c : nodes) {
        std::vector<int> k = coarse.grid.geometry.lattice(c);
        for (int& v : k) v *= 2;
        const auto f = fine.grid.geometry.node_at_lattice(k);
        ASSERT_TRUE(f.has_value());
        EXPECT_EQ(fine.grid.geometry.coordinates(*f), coarse.grid.geometry.coordinates(c));
    }
}

TEST(DirichletData, BallModesAgreeAtSevenEighths) {
    const Domain d = make_domain(BallSpec{1, 1.0});
    const auto g = build_grid(d, 1.0 / 32, 1.0 / 8);
    const auto exact = dirichlet_data(g, BoundaryMode::exact_ball);
    const auto asym = dirichlet_data(g, BoundaryMode::asymptotic);
    const auto corrected = dirichlet_data(g, BoundaryMode::asymptotic_corrected);
    const auto& geo = g.grid.geometry;
    std::size_t band = 0;
    for (NodeIndex i = 0; i < geo.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (g.grid.mask[k] != NodeMask::dirichlet) {
            EXPECT_EQ(exact[k], 0.0);
            continue;
        }
        ++band;
        const double t = 1.0 - geo.coordinates(i).squaredNorm();
        EXPECT_NEAR(exact[k], -std::log(t), 1e-14);
        EXPECT_NEAR(asym[k], exact[k], 1e-14);
        EXPECT_NEAR(corrected[k], exact[k], 1e-14);
    }
    EXPECT_GT(band, 0u);
    EXPECT_NEAR(exact_ball_value(point({std::sqrt(7.0 / 8.0), 0.0})), std::log(8.0), 1e-14);
}

TEST(DirichletData, ExactBallRequiresBall) {
    const Domain d = make_domain(EllipsoidSpec{{1.0}, {2.0}});
    const auto g = build_grid(d, 1.0 / 32, 0.25);
    EXPECT_THROW(dirichlet_data(g, BoundaryMode::exact_ball), InvariantError);
    const auto v = dirichlet_data(g, BoundaryMode::asymptotic);
    for (NodeIndex i = 0; i < g.grid.geometry.size(); ++i)
        if (g.grid.mask[static_cast<std::size_t>(i)] == NodeMask::dirichlet) {
            EXPECT_TRUE(std::isfinite(v[static_cast<std::size_t>(i)]));
            EXPECT_NEAR(v[static_cast<std::size_t>(i)], -std::log(-d.phi_value(g.grid.geometry.coordinates(i))), 1e-15);
        }
}

TEST(ExactBall, CentreOfTwoBall) {
    const auto jet = exact_ball_potential(Point::Zero(4));
    EXPECT_EQ(jet.u, 0.0);
    EXPECT_LT(max_abs(jet.hessian.A - ComplexMatrix<double>::Identity(2, 2)), 1e-15);
    EXPECT_LT(max_abs(jet.hessian.B), 1e-15);
}

TEST(ExactBall, HalfRadiusSquared) {
    const double r = std::sqrt(0.5);
    const auto one = exact_ball_potential(point({r * 0.6, r * 0.8}));
    const std::complex<double> z(r * 0.6, r * 0.8);
    EXPECT_NEAR(one.u, std::log(2.0), 1e-15);
    EXPECT_NEAR(std::abs(one.hessian.A(0, 0) - 4.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(one.hessian.B(0, 0) - 4.0 * std::conj(z) * std::conj(z)), 0.0, 1e-14);

    const auto two = exact_ball_potential(point({0.5, 0.0, 0.0, 0.5}));
    EXPECT_NEAR(std::real(two.hessian.A.determinant()), 8.0, 1e-13);
    EXPECT_NEAR(two.u, std::log(2.0), 1e-15);
}

TEST(ExactBall, SolvesEquationAtRandomPoints) {
    std::mt19937_64 rng(2024);
    for (int n = 1; n <= 2; ++n) {
        double worst = 0.0;
        for (int s = 0; s < 10000; ++s) {
            const auto jet = exact_ball_potential(random_in_ball(rng, n, 1.0));
            const double logdet = std::log(std::real(jet.hessian.A.determinant()));
            worst = std::max(worst, std::abs(logdet - (n + 1) * jet.u));
        }
        EXPECT_LT(worst, 1e-12) << "n=" << n;
    }
}

TEST(ExactBall, OtherRadius) {
    std::mt19937_64 rng(5);
    for (int s = 0; s < 100; ++s) {
        const auto jet = exact_ball_potential(random_in_ball(rng, 2, 2.0), 2.0);
        EXPECT_NEAR(std::log(std::real(jet.hessian.A.determinant())), 3.0 * jet.u, 1e-12);
    }
}

TEST(ExactBall, RejectsOutsidePoints) {
    EXPECT_THROW(exact_ball_potential(point({1.0, 0.0})), InvariantError);
}

TEST(Bordered, BallDefiningFunctionIsMinusOneToTheN) {
    std::mt19937_64 rng(17);
    for (int n = 1; n <= 2; ++n) {
        const double target = n == 1 ? -1.0 : 1.0;
        for (int s = 0; s < 1000; ++s) {
            const Point p = random_in_ball(rng, n, 1.0);
            const auto z = to_complex(p);
            const double v = 1.0 - z.squaredNorm();
            const ComplexVector<double> grad = -z.conjugate();  // v_i = -zbar_i
            const ComplexMatrix<double> ddbar = -ComplexMatrix<double>::Identity(n, n);
            ASSERT_NEAR(std::abs(bordered_determinant(v, grad, ddbar) - target), 0.0, 1e-12);
        }
    }
}
