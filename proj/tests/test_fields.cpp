#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "macns/operators.hpp"
#include "support.hpp"

using namespace macns;
using std::numbers::pi;

namespace {

MacGrid square(int n) { return build_grid(DomainSpec::unit_square(), Refinement::uniform(n)); }

ScalarFunction scalar(std::function<double(const Point&)> f) { return ScalarFunction{std::move(f), 5}; }
VectorFunction vec(std::function<Point(const Point&)> f) { return VectorFunction{std::move(f), 5}; }

}  // namespace

TEST(Quadrature, ExactForDegreeNine) {
    const auto r = gauss_legendre(5);
    for (int p = 0; p <= 9; ++p) {
        double s = 0.0;
        for (int k = 0; k < 5; ++k) s += r.weights[k] * std::pow(r.nodes[k], p);
        EXPECT_NEAR(s, 1.0 / (p + 1), 1e-15);
    }
}

TEST(ProjectCells, Examples) {
    const MacGrid g = square(2);
    const CellField c = project_cells(scalar([](const Point&) { return 3.5; }), g);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(c.values[k], 3.5, 1e-15);
    const CellField x = project_cells(scalar([](const Point& p) { return p[0]; }), g);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(x.values[k], g.cell(k).center[0] < 0.5 ? 0.25 : 0.75, 1e-15);
    const MacGrid one = square(1);
    EXPECT_NEAR(project_cells(scalar([](const Point& p) { return p[0] * p[0]; }), one).values[0], 1.0 / 3.0, 1e-15);
}

TEST(ProjectFacesMean, Examples) {
    const MacGrid g = square(2);
    const VelocityField c = project_faces_mean(vec([](const Point&) { return Point{2.0, 0.0, 0.0}; }), g);
    for (int s = 0; s < g.num_faces(0); ++s) EXPECT_NEAR(c[0].values[s], g.face(0, s).interior ? 2.0 : 0.0, 1e-15);
    for (int s = 0; s < g.num_faces(1); ++s) EXPECT_EQ(c[1].values[s], 0.0);
    const VelocityField x = project_faces_mean(vec([](const Point& p) { return Point{p[0], 0.0, 0.0}; }), g);
    const VelocityField y = project_faces_mean(vec([](const Point& p) { return Point{p[1], 0.0, 0.0}; }), g);
    for (int s = 0; s < g.num_faces(0); ++s) {
        const Face& f = g.face(0, s);
        if (!f.interior) continue;
        EXPECT_NEAR(x[0].values[s], 0.5, 1e-15);
        EXPECT_NEAR(y[0].values[s], f.center[1] < 0.5 ? 0.25 : 0.75, 1e-15);
    }
}

TEST(Fortin, Examples) {
    const MacGrid g = square(2);
    const VelocityField z = fortin_interpolate(vec([](const Point&) { return Point{0, 0, 0}; }), g);
    EXPECT_EQ(z[0].values.norm() + z[1].values.norm(), 0.0);
    const auto bubble = [](const Point& p) { return Point{p[0] * (1 - p[0]) * p[1] * (1 - p[1]), 0.0, 0.0}; };
    const VelocityField b = fortin_interpolate(vec(bubble), g);
    // Face at x = 0.5: 0.25 * mean of y(1-y) over each half.
    const double lower = 0.25 * (0.5 * 0.5 / 2 - 0.125 / 3) / 0.5;
    const double upper = 0.25 * ((0.5 - 1.0 / 3.0) - (0.125 - 0.125 / 3)) / 0.5;
    for (int s = 0; s < g.num_faces(0); ++s) {
        const Face& f = g.face(0, s);
        if (!f.interior) continue;
        EXPECT_NEAR(b[0].values[s], f.center[1] < 0.5 ? lower : upper, 1e-15);
    }
}

TEST(Fortin, RejectsBoundaryTrace) {
    const MacGrid g = square(4);
    try {
        fortin_interpolate(vec([](const Point&) { return Point{1.0, 0.0, 0.0}; }), g);
        FAIL();
    } catch (const GridError& e) {
        EXPECT_NE(std::string(e.what()).find("face"), std::string::npos);
    }
}

TEST(Fortin, PreservesDivergence) {
    // (x(1-x) y(1-y))^2 modulated by sin; divergence computed by hand.
    const auto P = [](double t) { return t * t * (1 - t) * (1 - t); };
    const auto dP = [](double t) { return 2 * t * (1 - t) * (1 - 2 * t); };
    const VectorFunction v = vec([&](const Point& p) {
        const double m = std::sin(pi * p[0]) * std::sin(pi * p[1]);
        return Point{m * P(p[0]) * P(p[1]), m * P(p[0]) * P(p[1]), 0.0};
    });
    const ScalarFunction div = scalar([&](const Point& p) {
        const double sx = std::sin(pi * p[0]), sy = std::sin(pi * p[1]);
        const double cx = std::cos(pi * p[0]), cy = std::cos(pi * p[1]);
        const double ddx = pi * cx * sy * P(p[0]) * P(p[1]) + sx * sy * dP(p[0]) * P(p[1]);
        const double ddy = pi * sx * cy * P(p[0]) * P(p[1]) + sx * sy * P(p[0]) * dP(p[1]);
        return ddx + ddy;
    });
    for (int n : {3, 8, 13}) {
        const MacGrid g = square(n);
        const CellField lhs = div_cells(g, fortin_interpolate(v, g));
        const CellField rhs = project_cells(div, g);
        EXPECT_LT((lhs.values - rhs.values).lpNorm<Eigen::Infinity>(), 1e-9);
    }
}

TEST(InterpolatePhi, Examples) {
    const MacGrid g = square(2);
    const CellField x = interpolate_phi(scalar([](const Point& p) { return p[0]; }), g);
    const CellField xy = interpolate_phi(scalar([](const Point& p) { return p[0] * p[1]; }), g);
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(x.values[k], g.cell(k).center[0]);
        EXPECT_EQ(xy.values[k], g.cell(k).center[0] * g.cell(k).center[1]);
    }
}

TEST(Reconstruct, FaceExamples) {
    const MacGrid g = square(2);
    FaceField v = zero_faces(g, 0);
    EXPECT_EQ(reconstruct_face(v, 0, g).values, v.values);
    // 1 on the interior vertical face of the lower row only.
    for (int s = 0; s < g.num_faces(0); ++s)
        if (g.face(0, s).interior && g.face(0, s).center[1] < 0.5) v.values[s] = 1.0;
    const FaceField r = reconstruct_face(v, 1, g);
    for (int s = 0; s < g.num_faces(1); ++s) {
        const Face& f = g.face(1, s);
        if (!f.interior) {
            EXPECT_EQ(r.values[s], 0.0);
            continue;
        }
        EXPECT_NEAR(r.values[s], 0.25, 1e-15);  // both horizontal interior faces touch that face once
    }
    const MacGrid g4 = square(4);
    FaceField c = zero_faces(g4, 0);
    for (int s = 0; s < g4.num_faces(0); ++s)
        if (g4.face(0, s).interior) c.values[s] = 2.0;
    const FaceField rc = reconstruct_face(c, 1, g4);
    for (int s = 0; s < g4.num_faces(1); ++s) {
        const Face& f = g4.face(1, s);
        bool all_interior = f.interior;
        if (f.interior)
            for (int n : g4.neighbor_faces(1, s, 0)) all_interior = all_interior && g4.face(0, n).interior;
        if (all_interior) EXPECT_NEAR(rc.values[s], 2.0, 1e-15);
    }
}

TEST(Reconstruct, CellMatchesBruteForce) {
    std::mt19937_64 rng(3);
    for (const auto& [name, g] : fixtures::grid_family()) {
        const VelocityField v = fixtures::random_velocity(g, rng);
        for (int i = 0; i < g.dimension(); ++i) {
            const CellField r = reconstruct_cell(v[i], g);
            for (int k = 0; k < g.num_cells(); ++k) {
                const auto& f = g.cell(k).faces[i];
                EXPECT_EQ(r.values[k], 0.5 * (v[i].values[f[0]] + v[i].values[f[1]]));
            }
        }
    }
    const MacGrid one = square(1);
    FaceField v = zero_faces(one, 0, false);
    v.values << 0.0, 1.0;
    EXPECT_EQ(reconstruct_cell(v, one).values[0], 0.5);
}

TEST(Reconstruct, LqStability) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const MacGrid g = build_grid(DomainSpec::unit_square(),
                                     Refinement::from_lines(fixtures::graded_lines(0, 1, 5 + trial, 1.2),
                                                             fixtures::graded_lines(0, 1, 9 - trial / 2, 0.85), {}));
        const VelocityField v = fixtures::random_velocity(g, rng);
        const double eta = g.regularity();
        for (double q : {1.0, 2.0, 4.0}) {
            const FaceField r = reconstruct_face(v[0], 1, g);
            EXPECT_LE(lq_norm(g, r, q), std::pow(4.0, 1 / q) * std::pow(eta, -2 / q) * lq_norm(g, v[0], q));
        }
    }
}

TEST(Reconstruct, ConvergesUnderRefinement) {
    const auto f = vec([](const Point& p) { return Point{std::sin(pi * p[0]) * std::sin(pi * p[1]), 0.0, 0.0}; });
    double prev = 1e300;
    for (int n : {4, 8, 16, 32}) {
        const MacGrid g = square(n);
        const FaceField r = reconstruct_face(project_faces_mean(f, g)[0], 1, g);
        const FaceField exact = project_faces_mean(
            vec([](const Point& p) { return Point{0.0, std::sin(pi * p[0]) * std::sin(pi * p[1]), 0.0}; }), g)[1];
        FaceField diff = r;
        diff.values -= exact.values;
        const double e = lq_norm(g, diff, 2.0);
        EXPECT_LT(e, prev);
        prev = e;
    }
}

TEST(Projectors, Linear) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2, 2);
    const MacGrid g = build_grid(DomainSpec::l_shape(), Refinement::uniform({8, 4, 1}));
    for (int t = 0; t < 5; ++t) {
        const double a = u(rng), b = u(rng), c1 = u(rng), c2 = u(rng);
        const auto f1 = [=](const Point& p) { return std::sin(c1 * p[0]) + p[1] * p[1]; };
        const auto f2 = [=](const Point& p) { return std::cos(c2 * p[1]) * p[0]; };
        const auto s1 = scalar(f1), s2 = scalar(f2);
        const auto s12 = scalar([=](const Point& p) { return a * f1(p) + b * f2(p); });
        const Vector lin = a * project_cells(s1, g).values + b * project_cells(s2, g).values;
        EXPECT_LT((project_cells(s12, g).values - lin).norm(), 1e-13 * (1 + lin.norm()));
        const auto v1 = vec([=](const Point& p) { return Point{f1(p), f2(p), 0}; });
        const auto v2 = vec([=](const Point& p) { return Point{f2(p), -f1(p), 0}; });
        const auto v12 = vec([=](const Point& p) { return Point{a * f1(p) + b * f2(p), a * f2(p) - b * f1(p), 0}; });
        const VelocityField pl = a * project_faces_mean(v1, g) + b * project_faces_mean(v2, g);
        const VelocityField pd = project_faces_mean(v12, g);
        for (int i = 0; i < 2; ++i) EXPECT_LT((pl[i].values - pd[i].values).norm(), 1e-13 * (1 + pl[i].values.norm()));
    }
}

TEST(Csv, HeaderAndPrecision) {
    const MacGrid g = square(2);
    CellField c = zero_cells(g);
    c.values[0] = 1.0 / 3.0;
    std::ostringstream os;
    write_csv(os, g, c);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "id,x,y,value");
    EXPECT_NE(s.find("0.33333333333333331"), std::string::npos);
    const MacGrid g3 = build_grid(DomainSpec::unit_cube(), Refinement::uniform(1));
    std::ostringstream os3;
    write_csv(os3, g3, zero_faces(g3, 2));
    EXPECT_EQ(os3.str().substr(0, 12), "id,x,y,z,val");
}

TEST(DofLayout, PackUnpackRoundTrip) {
    std::mt19937_64 rng(2);
    for (const auto& [name, g] : fixtures::grid_family()) {
        const DofLayout layout(g);
        const VelocityField v = fixtures::random_velocity(g, rng);
        const VelocityField w = layout.unpack(layout.pack(v));
        for (int i = 0; i < g.dimension(); ++i) EXPECT_EQ(v[i].values, w[i].values);
    }
}
