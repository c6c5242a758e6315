#include <gtest/gtest.h>

#include <cmath>

#include "amoebot/geometry.hpp"

using namespace amoebot;

TEST(Geometry, SixDistinctNeighbors) {
    NodeCoord u{0, 0};
    std::array<NodeCoord, 6> nbrs;
    for (Direction d : kAllDirs) nbrs[size_t(dir_index(d))] = step(u, d);
    for (size_t i = 0; i < 6; ++i)
        for (size_t j = i + 1; j < 6; ++j) EXPECT_NE(nbrs[i], nbrs[j]);
}

TEST(Geometry, OppositeIsInvolution) {
    for (Direction d : kAllDirs) {
        EXPECT_EQ(opposite(opposite(d)), d);
        EXPECT_EQ(axis_of(d), axis_of(opposite(d)));
        NodeCoord u{3, -2};
        EXPECT_EQ(step(step(u, d), opposite(d)), u);
    }
}

TEST(Geometry, AxisPairs) {
    EXPECT_EQ(axis_of(Direction::E), Axis::X);
    EXPECT_EQ(axis_of(Direction::W), Axis::X);
    EXPECT_EQ(axis_of(Direction::NE), Axis::Y);
    EXPECT_EQ(axis_of(Direction::SW), Axis::Y);
    EXPECT_EQ(axis_of(Direction::NW), Axis::Z);
    EXPECT_EQ(axis_of(Direction::SE), Axis::Z);
}

TEST(Geometry, EastWestTwoApart) {
    NodeCoord u{3, -2};
    NodeCoord e = step(u, Direction::E);
    NodeCoord w = step(u, Direction::W);
    EXPECT_EQ(grid_distance(e, w), 2);
    EXPECT_EQ(e.b, w.b);
}

TEST(Geometry, GridDistanceMatchesBfsOnSmallBall) {
    // Spot check against direct expansion around the origin.
    EXPECT_EQ(grid_distance({0, 0}, {0, 0}), 0);
    EXPECT_EQ(grid_distance({0, 0}, {2, 0}), 2);
    EXPECT_EQ(grid_distance({0, 0}, {2, -1}), 2);
    EXPECT_EQ(grid_distance({0, 0}, {-1, 2}), 2);
    EXPECT_EQ(grid_distance({0, 0}, {1, 1}), 2);
    EXPECT_EQ(grid_distance({0, 0}, {-2, 1}), 2);
    EXPECT_EQ(grid_distance({-3, 1}, {2, -2}), 5);
}

TEST(Geometry, CcwOrderMatchesAngles) {
    // euclid_x2/row realize the embedding; check the six directions appear
    // in counterclockwise angular order starting at east.
    double prev = -1.0;
    for (Direction d : kAllDirs) {
        auto s = dir_step(d);
        double x = s[0] + 0.5 * s[1];
        double y = 0.8660254037844386 * s[1];
        double ang = std::atan2(y, x);
        if (ang < 0) ang += 2 * 3.14159265358979323846;
        EXPECT_GT(ang, prev);
        prev = ang;
    }
}

TEST(Geometry, DirectionNamesRoundTrip) {
    for (Direction d : kAllDirs) {
        Direction out;
        ASSERT_TRUE(parse_direction(direction_name(d), out));
        EXPECT_EQ(out, d);
    }
    Direction out;
    EXPECT_FALSE(parse_direction("NN", out));
}
