#include <doctest.h>

#include <cmath>

#include "mtgcd/core/rng.hpp"
#include "mtgcd/geom/polygon.hpp"

using namespace mtgcd;
using geom::Polygon;
using geom::Vec2;

namespace {
Polygon unit_rect(double x0, double y0, double w, double h) {
    return {{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}};
}
} // namespace

TEST_CASE("signed area is positive for the y-down vertex order used everywhere") {
    const Polygon p = unit_rect(2, 3, 4, 5);
    CHECK(geom::signed_area(p) == doctest::Approx(20.0));
    Polygon rev(p.rbegin(), p.rend());
    CHECK(geom::signed_area(rev) == doctest::Approx(-20.0));
    CHECK(geom::area(rev) == doctest::Approx(20.0));
    CHECK(geom::signed_area(geom::oriented(rev)) == doctest::Approx(20.0));
}

TEST_CASE("contains includes the boundary and rejects outside points") {
    const Polygon p = unit_rect(0, 0, 10, 10);
    CHECK(geom::contains(p, {5, 5}));
    CHECK(geom::contains(p, {0, 0}));
    CHECK(geom::contains(p, {10, 5}));
    CHECK_FALSE(geom::contains(p, {10.001, 5}));
    CHECK_FALSE(geom::contains(p, {-0.001, 5}));
}

TEST_CASE("convex hull drops interior and collinear points") {
    std::vector<Vec2> pts = unit_rect(0, 0, 4, 4);
    pts.push_back({2, 2});
    pts.push_back({2, 0}); // collinear with the top edge
    const Polygon h = geom::convex_hull(pts);
    CHECK(h.size() == 4);
    CHECK(geom::area(h) == doctest::Approx(16.0));
    CHECK(geom::signed_area(h) > 0.0);
}

TEST_CASE("swept rectangle area equals base plus swept cross-section") {
    const Polygon p = unit_rect(0, 0, 6, 4);
    SUBCASE("axis-aligned sweep") {
        const Polygon s = geom::swept(p, {10, 0});
        CHECK(geom::area(s) == doctest::Approx(6 * 4 + 10 * 4));
    }
    SUBCASE("diagonal sweep") {
        // Minkowski sum area = A + perimeter-projection term: for a convex
        // polygon swept by segment d, added area is |d| times the width of
        // the polygon perpendicular to d. For an axis rect and d=(3,4):
        // width perpendicular to d is (6*4 + 4*3)/5.
        const Polygon s = geom::swept(p, {3, 4});
        CHECK(geom::area(s) == doctest::Approx(24.0 + (6.0 * 4.0 + 4.0 * 3.0)));
    }
    SUBCASE("zero sweep is the identity") {
        const Polygon s = geom::swept(p, {0, 0});
        CHECK(geom::area(s) == doctest::Approx(24.0));
        CHECK(s.size() == 4);
    }
}

TEST_CASE("swept polygon contains both the base and its translate") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const Polygon p = unit_rect(rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(2, 20),
                                    rng.uniform(2, 20));
        const Vec2 d{rng.uniform(-30, 30), rng.uniform(-30, 30)};
        const Polygon s = geom::swept(p, d);
        for (const Vec2& v : p) {
            CHECK(geom::contains(s, v));
            CHECK(geom::contains(s, v + d));
            CHECK(geom::contains(s, v + d * 0.5));
        }
    }
}

TEST_CASE("for_each_pixel visits exactly the pixel centers inside") {
    // Rect [0,3]x[0,2]: centers (c+0.5, r+0.5) inside for c in 0..2, r in 0..1.
    const Polygon p = unit_rect(0, 0, 3, 2);
    int count = 0;
    geom::for_each_pixel(p, 10, 10, [&](int r, int c) {
        CHECK(r >= 0);
        CHECK(r <= 1);
        CHECK(c >= 0);
        CHECK(c <= 2);
        ++count;
    });
    CHECK(count == 6);
}

TEST_CASE("for_each_pixel clips to the frame") {
    const Polygon p = unit_rect(-5, -5, 8, 8);
    int count = 0;
    geom::for_each_pixel(p, 4, 4, [&](int, int) { ++count; });
    CHECK(count == 9); // clipped to [0,3)x[0,3) pixel centers
}

TEST_CASE("pixel count approximates area within a perimeter band") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const double w = rng.uniform(4, 40), h = rng.uniform(4, 40);
        const Polygon p = unit_rect(rng.uniform(0, 20), rng.uniform(0, 20), w, h);
        int count = 0;
        geom::for_each_pixel(p, 100, 100, [&](int, int) { ++count; });
        const double per = 2 * (w + h);
        CHECK(std::abs(count - geom::area(p)) <= per);
    }
}
