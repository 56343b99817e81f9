#include <catch_amalgamated.hpp>

#include <random>

#include "recov/geometry.hpp"

using namespace recov;

TEST_CASE("provider to internal mapping") {
    const Vec2 center = to_internal_xy({60.0, 40.0});
    CHECK(center.x == Catch::Approx(52.5));
    CHECK(center.y == Catch::Approx(34.0));

    const Vec2 origin = to_internal_xy({0.0, 0.0});
    CHECK(origin.x == Catch::Approx(0.0));
    CHECK(origin.y == Catch::Approx(68.0));

    const Vec2 corner = to_internal_xy({120.0, 80.0});
    CHECK(corner.x == Catch::Approx(105.0));
    CHECK(corner.y == Catch::Approx(0.0));

    CHECK_THROWS_AS(to_internal_xy({-1.0, 40.0}), RangeError);
    CHECK_THROWS_AS(to_internal_xy({60.0, 80.5}), RangeError);
}

TEST_CASE("round trip reproduces provider coordinates within 1e-9") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.0, 120.0), uy(0.0, 80.0);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 p{ux(rng), uy(rng)};
        const Vec2 back = internal_to_provider(to_internal_xy(p));
        CHECK(std::fabs(back.x - p.x) < 1e-9);
        CHECK(std::fabs(back.y - p.y) < 1e-9);
    }
}

TEST_CASE("left-to-right flip is an involution preserving distances") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ux(0.0, 105.0), uy(0.0, 68.0);
    for (int i = 0; i < 200; ++i) {
        const Vec2 a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)};
        const Vec2 fa = flip_ltr(a);
        CHECK(flip_ltr(fa).x == Catch::Approx(a.x));
        CHECK(flip_ltr(fa).y == Catch::Approx(a.y));
        CHECK(dist(fa, flip_ltr(b)) == Catch::Approx(dist(a, b)));
    }
}

TEST_CASE("goal distance and angle") {
    CHECK(dist_to_goal({105.0, 34.0}) == 0.0);
    CHECK(angle_to_goal({105.0, 34.0}) == 0.0);
    CHECK(angle_to_goal({105.0, 10.0}) == Catch::Approx(M_PI / 2.0));
    CHECK(angle_to_goal({52.5, 34.0}) == Catch::Approx(0.0));
    // symmetric above/below the goal line
    CHECK(angle_to_goal({80.0, 20.0}) == Catch::Approx(angle_to_goal({80.0, 48.0})));
}

TEST_CASE("point in polygon, boundary inclusive") {
    const Polygon square{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
    CHECK(point_in_polygon(square, {5, 5}));
    CHECK(point_in_polygon(square, {0, 5}));    // on edge
    CHECK(point_in_polygon(square, {10, 10}));  // on vertex
    CHECK_FALSE(point_in_polygon(square, {10.01, 5}));
    CHECK_FALSE(point_in_polygon(square, {-0.01, 5}));

    const Polygon concave{{0, 0}, {10, 0}, {10, 10}, {5, 5}, {0, 10}};
    CHECK(point_in_polygon(concave, {2, 3}));
    CHECK_FALSE(point_in_polygon(concave, {5, 9}));
}

TEST_CASE("self intersection diagnostic") {
    const Polygon simple{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
    CHECK(polygon_self_intersections(simple) == 0);
    const Polygon bowtie{{0, 0}, {10, 10}, {10, 0}, {0, 10}};
    CHECK(polygon_self_intersections(bowtie) > 0);
}
