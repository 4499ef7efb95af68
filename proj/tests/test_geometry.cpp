#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>

#include "oracles.hpp"
#include "polyloc/geometry.hpp"

using namespace polyloc;

namespace {

ConvexPolygon box(double x0, double y0, double x1, double y1) {
    return ConvexPolygon::from_rect({{x0, y0}, {x1, y1}});
}

bool near(Point2 a, Point2 b, double tol) { return distance(a, b) <= tol; }

}  // namespace

TEST_CASE("ConvexPolygon rejects invalid vertex lists") {
    CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}}), std::invalid_argument);
    // clockwise
    CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), std::invalid_argument);
    // reflex
    CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {NAN, 0}, {0, 1}}), std::invalid_argument);
    CHECK(oracle::convexity_violation(box(0, 0, 1, 1)).empty());
}

TEST_CASE("circumscribed_disk_polygon") {
    SUBCASE("square from radius 1, four edges, 45 degree offset") {
        const auto p = circumscribed_disk_polygon({0, 0}, 1.0, 4, std::numbers::pi / 4);
        const std::vector<Point2> expected{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
        REQUIRE(p.size() == 4);
        for (std::size_t k = 0; k < 4; ++k) CHECK(near(p.vertices()[k], expected[k], 1e-12));
        CHECK(area(p) == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("translation") {
        const auto p = circumscribed_disk_polygon({3, 4}, 1.0, 4, std::numbers::pi / 4);
        const std::vector<Point2> expected{{4, 5}, {2, 5}, {2, 3}, {4, 3}};
        for (std::size_t k = 0; k < 4; ++k) CHECK(near(p.vertices()[k], expected[k], 1e-12));
    }
    SUBCASE("circumradius") {
        const auto p = circumscribed_disk_polygon({0, 0}, 10.0, 16, 0.3);
        for (const Point2& v : p.vertices()) CHECK(norm(v) == doctest::Approx(10.195911582083184));
    }
    SUBCASE("area of the 16-gon around the unit disk") {
        const auto p = circumscribed_disk_polygon({0, 0}, 1.0, 16, 0.0);
        CHECK(area(p) == doctest::Approx(3.182597878074528).epsilon(1e-12));
    }
    SUBCASE("apothem equals the radius") {
        Rng rng(5);
        for (int t = 0; t < 200; ++t) {
            const Point2 c{rng.uniform(-50, 50), rng.uniform(-50, 50)};
            const double r = rng.uniform(0.1, 20.0);
            const int n = 3 + static_cast<int>(rng.uniform() * 30);
            const auto p = circumscribed_disk_polygon(c, r, n, rng.uniform(0, 7));
            double min_d = 1e300;
            for (const Halfspace& h : p.halfspaces()) min_d = std::min(min_d, -h.signed_distance(c));
            CHECK(std::abs(min_d - r) <= 1e-12 * std::max(1.0, r) * 10);
            CHECK(oracle::convexity_violation(p).empty());
        }
    }
    SUBCASE("argument errors") {
        CHECK_THROWS_AS(circumscribed_disk_polygon({0, 0}, 0.0, 8, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(circumscribed_disk_polygon({0, 0}, -1.0, 8, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(circumscribed_disk_polygon({0, 0}, 1.0, 2, 0.0), std::invalid_argument);
    }
}

TEST_CASE("clip") {
    SUBCASE("overlapping rectangles") {
        const auto r = clip(box(-1, -1, 1, 1), box(0, -1, 2, 1));
        REQUIRE(r);
        CHECK(area(*r) == doctest::Approx(2.0).epsilon(1e-12));
        const Rect b = bounding_rect(*r);
        CHECK(b.min.x == doctest::Approx(0.0));
        CHECK(b.max.x == doctest::Approx(1.0));
        CHECK(b.min.y == doctest::Approx(-1.0));
        CHECK(b.max.y == doctest::Approx(1.0));
        const auto& v = r->vertices();
        CHECK(oracle::intersection_area(box(-1, -1, 1, 1).vertices(), box(0, -1, 2, 1).vertices(),
                                        1e-12) == doctest::Approx(2.0));
        CHECK(oracle::convexity_violation(*r).empty());
        CHECK(v.size() == 4);
    }
    SUBCASE("idempotent") {
        const auto p = circumscribed_disk_polygon({1, 2}, 3.0, 11, 0.4);
        const auto r = clip(p, p);
        REQUIRE(r);
        CHECK(std::abs(area(*r) - area(p)) <= 1e-12 * area(p));
    }
    SUBCASE("disjoint") { CHECK_FALSE(clip(box(0, 0, 1, 1), box(5, 5, 6, 6))); }
    SUBCASE("edge-touching squares are empty") { CHECK_FALSE(clip(box(0, 0, 1, 1), box(1, 0, 2, 1))); }
    SUBCASE("corner-touching squares are empty") { CHECK_FALSE(clip(box(0, 0, 1, 1), box(1, 1, 2, 2))); }
    SUBCASE("subject inside clipper") {
        const auto r = clip(box(0.2, 0.2, 0.4, 0.4), box(0, 0, 1, 1));
        REQUIRE(r);
        CHECK(area(*r) == doctest::Approx(0.04));
    }
    SUBCASE("vertex count can change") {
        const auto tri = ConvexPolygon({{-2, -1}, {2, -1}, {0, 2}});
        const auto r = clip(box(-1, -1, 1, 1), tri);
        REQUIRE(r);
        CHECK(r->size() == 6);
        CHECK(area(*r) == doctest::Approx(4.0 - 1.0 / 6.0));
    }
}

TEST_CASE("clip matches the halfspace-enumeration oracle on random pairs") {
    Rng rng(2024);
    int compared = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto va = oracle::random_convex(rng, 3, 12);
        const auto vb = oracle::random_convex(rng, 3, 12);
        const ConvexPolygon a(va);
        const ConvexPolygon b(vb);
        const double scale = std::max(a.scale(), b.scale());
        const double expected = oracle::intersection_area(va, vb, 1e-12 * scale);
        const auto ab = clip(a, b);
        const auto ba = clip(b, a);
        if (expected < 1e-12 * scale * scale) {
            CHECK_FALSE(ab);
            continue;
        }
        REQUIRE(ab);
        REQUIRE(ba);
        ++compared;
        CHECK(std::abs(area(*ab) - expected) <= 1e-9 * expected);
        CHECK(std::abs(area(*ab) - area(*ba)) <= 1e-9 * std::max(area(a), area(b)));
        CHECK(oracle::convexity_violation(*ab) == "");
        for (const Point2& v : ab->vertices()) {
            CHECK(contains(a, v));
            CHECK(contains(b, v));
        }
    }
    CHECK(compared > 300);
}

TEST_CASE("intersect_all") {
    const auto sq = box(0, 0, 1, 1);
    SUBCASE("single polygon") {
        const std::vector<ConvexPolygon> one{sq};
        const auto r = intersect_all(one);
        REQUIRE(r);
        CHECK(r->vertices() == sq.vertices());
    }
    SUBCASE("three shifted unit squares") {
        const std::vector<ConvexPolygon> polys{sq, box(0.5, 0, 1.5, 1), box(0, 0.5, 1, 1.5)};
        const auto r = intersect_all(polys);
        REQUIRE(r);
        CHECK(area(*r) == doctest::Approx(0.25).epsilon(1e-12));
        const std::vector<ConvexPolygon> reversed{polys[2], polys[1], polys[0]};
        CHECK(area(*intersect_all(reversed)) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("disjoint member empties the fold") {
        const std::vector<ConvexPolygon> polys{sq, box(0.5, 0.5, 2, 2), box(5, 5, 6, 6)};
        CHECK_FALSE(intersect_all(polys));
    }
    SUBCASE("order independence") {
        Rng rng(9);
        for (int t = 0; t < 100; ++t) {
            std::vector<ConvexPolygon> polys;
            for (int k = 0; k < 4; ++k) {
                polys.push_back(circumscribed_disk_polygon({rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                                           rng.uniform(2, 3), 16, rng.uniform(0, 1)));
            }
            const auto fwd = intersect_all(polys);
            std::reverse(polys.begin(), polys.end());
            const auto bwd = intersect_all(polys);
            REQUIRE(fwd);
            REQUIRE(bwd);
            CHECK(std::abs(area(*fwd) - area(*bwd)) <= 1e-9 * area(*fwd));
        }
    }
    SUBCASE("empty list") {
        CHECK_THROWS_AS(intersect_all(std::span<const ConvexPolygon>{}), std::invalid_argument);
    }
}

TEST_CASE("offset_outward") {
    SUBCASE("square grows by the offset on every side") {
        const auto r = offset_outward(box(-1, -1, 1, 1), 0.5);
        const std::vector<Point2> expected{{-1.5, -1.5}, {1.5, -1.5}, {1.5, 1.5}, {-1.5, 1.5}};
        REQUIRE(r.size() == 4);
        for (std::size_t k = 0; k < 4; ++k) CHECK(near(r.vertices()[k], expected[k], 1e-12));
        CHECK(area(r) == doctest::Approx(9.0).epsilon(1e-12));
    }
    SUBCASE("zero offset is the identity") {
        const auto p = circumscribed_disk_polygon({2, -3}, 1.7, 9, 0.1);
        const auto r = offset_outward(p, 0.0);
        for (std::size_t k = 0; k < p.size(); ++k) CHECK(near(r.vertices()[k], p.vertices()[k], 1e-12));
    }
    SUBCASE("contains the Minkowski sum with the disk") {
        std::vector<Point2> hex;
        for (int k = 0; k < 6; ++k) {
            const double a = k * std::numbers::pi / 3;
            hex.push_back({std::cos(a), std::sin(a)});
        }
        const auto r = offset_outward(ConvexPolygon(hex), 1.0);
        for (const Point2& v : hex) {
            for (int k = 0; k < 64; ++k) {
                const double a = 2 * std::numbers::pi * k / 64;
                CHECK(contains(r, v + Point2{std::cos(a), std::sin(a)}));
            }
        }
    }
    SUBCASE("monotone and additive") {
        Rng rng(31);
        for (int t = 0; t < 200; ++t) {
            const ConvexPolygon p(oracle::random_convex(rng, 3, 12));
            const double d1 = rng.uniform(0.0, 2.0);
            const double d2 = rng.uniform(0.01, 2.0);
            const auto once = offset_outward(p, d1 + d2);
            const auto twice = offset_outward(offset_outward(p, d1), d2);
            CHECK(area(offset_outward(p, d1)) < area(once));
            CHECK(area(p) < area(offset_outward(p, d2)));
            REQUIRE(once.size() == twice.size());
            for (std::size_t k = 0; k < once.size(); ++k) {
                CHECK(near(once.vertices()[k], twice.vertices()[k], 1e-9 * once.scale()));
            }
            CHECK(oracle::convexity_violation(once).empty());
        }
    }
    SUBCASE("negative distance") {
        CHECK_THROWS_AS(offset_outward(box(0, 0, 1, 1), -0.1), std::invalid_argument);
    }
}

TEST_CASE("area, contains and bounding_rect") {
    CHECK(area(box(0, 0, 1, 1)) == doctest::Approx(1.0));
    CHECK(area(box(-1.5, -1.5, 1.5, 1.5)) == doctest::Approx(9.0));

    const auto unit = box(-1, -1, 1, 1);
    CHECK(contains(unit, {0, 0}));
    CHECK_FALSE(contains(unit, {2, 0}));
    CHECK(contains(unit, {1, 0}));

    const auto diamond = ConvexPolygon({{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
    Rect r = bounding_rect(diamond);
    CHECK(r.min == Point2{-1, -1});
    CHECK(r.max == Point2{1, 1});
    r = bounding_rect(box(0, 0, 1, 1));
    CHECK(r.min == Point2{0, 0});
    CHECK(r.max == Point2{1, 1});
    r = bounding_rect(ConvexPolygon({{0, 0}, {2, 0}, {0, 1}}));
    CHECK(r.min == Point2{0, 0});
    CHECK(r.max == Point2{2, 1});
}

TEST_CASE("sample_uniform") {
    SUBCASE("acceptance rate of a half-square triangle") {
        const ConvexPolygon tri({{0, 0}, {1, 0}, {0, 1}});
        Rng rng(77);
        const auto s = sample_uniform_counted(tri, 100000, rng);
        REQUIRE(s.points.size() == 100000);
        const double rate = static_cast<double>(s.points.size()) / static_cast<double>(s.draws);
        CHECK(std::abs(rate - 0.5) <= 0.02);
        for (const Point2& p : s.points) {
            if (!contains(tri, p)) {
                FAIL("sample outside the polygon");
            }
        }
    }
    SUBCASE("quadrant counts are uniform") {
        const auto unit = box(0, 0, 1, 1);
        Rng rng(78);
        const auto pts = sample_uniform(unit, 100000, rng);
        double counts[4] = {0, 0, 0, 0};
        for (const Point2& p : pts) counts[(p.x >= 0.5 ? 1 : 0) + (p.y >= 0.5 ? 2 : 0)] += 1;
        double chi2 = 0.0;
        for (double c : counts) chi2 += (c - 25000.0) * (c - 25000.0) / 25000.0;
        const double p_value = boost::math::cdf(boost::math::complement(
            boost::math::chi_squared_distribution<double>(3.0), chi2));
        CHECK(p_value > 0.01);
    }
    SUBCASE("seeded streams repeat") {
        const auto p = circumscribed_disk_polygon({0, 0}, 2.0, 7, 0.2);
        Rng a(5);
        Rng b(5);
        CHECK(sample_uniform(p, 500, a) == sample_uniform(p, 500, b));
    }
}
