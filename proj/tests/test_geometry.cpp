#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "codecheck/error.hpp"
#include "codecheck/geometry.hpp"
#include "oracles.hpp"

using codecheck::Errc;
using codecheck::Error;
using namespace codecheck::geometry;

using oracle::random_polygon;
using oracle::random_rigid;
using oracle::shoelace;

TEST(Geometry, UnitSquareAreaAndUpwardNormal) {
    const std::vector<Vec3> square{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    EXPECT_DOUBLE_EQ(loop_area(square), 1.0);
    EXPECT_DOUBLE_EQ(tilt_degrees(newell_sum(square)), 0.0);
}

TEST(Geometry, WallFacingSouth) {
    const std::vector<Vec3> wall{{0, 0, 0}, {10, 0, 0}, {10, 0, 3}, {0, 0, 3}};
    EXPECT_DOUBLE_EQ(loop_area(wall), 30.0);
    const auto n = newell_sum(wall);
    EXPECT_DOUBLE_EQ(tilt_degrees(n), 90.0);
    EXPECT_DOUBLE_EQ(azimuth_degrees(n), 180.0);
}

TEST(Geometry, AzimuthCardinals) {
    EXPECT_DOUBLE_EQ(azimuth_degrees({0, 1, 0}), 0.0);
    EXPECT_DOUBLE_EQ(azimuth_degrees({1, 0, 0}), 90.0);
    EXPECT_DOUBLE_EQ(azimuth_degrees({0, -1, 0}), 180.0);
    EXPECT_DOUBLE_EQ(azimuth_degrees({-1, 0, 0}), 270.0);
}

TEST(Geometry, HorizontalSurfaceHasNoAzimuth) {
    try {
        (void)azimuth_degrees({0, 0, 1});
        FAIL() << "expected HorizontalSurface";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::HorizontalSurface);
    }
}

TEST(Geometry, DegenerateLoops) {
    const std::vector<Vec3> collinear{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const std::vector<Vec3> repeated{{0, 0, 0}, {0, 0, 0}, {1, 1, 1}};
    EXPECT_TRUE(is_degenerate(collinear));
    EXPECT_TRUE(is_degenerate(repeated));
    EXPECT_EQ(distinct_points(repeated), 2u);
    try {
        (void)loop_area(collinear);
        FAIL() << "expected DegenerateLoop";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DegenerateLoop);
    }
}

TEST(Geometry, PlaneDeviationOfWarpedQuad) {
    const std::vector<Vec3> flat{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    const std::vector<Vec3> warped{{0, 0, 0}, {1, 0, 0}, {1, 1, 0.2}, {0, 1, 0}};
    EXPECT_LT(max_plane_deviation(flat), 1e-12);
    EXPECT_GT(max_plane_deviation(warped), 0.01);
    EXPECT_DOUBLE_EQ(loop_diameter(flat), std::sqrt(2.0));
}

TEST(GeometryProperty, NewellAreaMatchesShoelaceUnderRigidMotion) {
    std::mt19937_64 rng(20240917);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto flat = random_polygon(rng);
        const auto expected = shoelace(flat);
        const auto motion = random_rigid(rng);
        std::vector<Vec3> moved;
        for (const auto& p : flat) {
            moved.push_back(motion.apply(p));
        }
        ASSERT_NEAR(loop_area(moved), expected, 1e-9 * expected) << "trial " << trial;
    }
}

TEST(GeometryProperty, ReversalMirrorsTilt) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto motion = random_rigid(rng);
        std::vector<Vec3> loop;
        for (const auto& p : random_polygon(rng)) {
            loop.push_back(motion.apply(p));
        }
        std::vector<Vec3> reversed(loop.rbegin(), loop.rend());
        const double t = tilt_degrees(newell_sum(loop));
        const double r = tilt_degrees(newell_sum(reversed));
        ASSERT_NEAR(r, 180.0 - t, 1e-9) << "trial " << trial;
    }
}

TEST(GeometryProperty, AreaIsTranslationInvariantFarFromOrigin) {
    const std::vector<Vec3> base{{0, 0, 0}, {4, 0, 0}, {4, 2.5, 0}, {0, 2.5, 0}};
    std::vector<Vec3> far;
    for (const auto& p : base) {
        far.push_back(p + Vec3{1e6, -2e6, 3e5});
    }
    EXPECT_NEAR(loop_area(far), 10.0, 1e-9 * 10.0);
}
