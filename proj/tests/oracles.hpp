#pragma once

// Test-only reference computations. Nothing here calls into the clipping,
// offsetting or sampling code it is used to check.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "polyloc/geometry.hpp"
#include "polyloc/rng.hpp"

namespace oracle {

using polyloc::Point2;

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(),
              [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    auto turn = [](Point2 o, Point2 a, Point2 b) { return polyloc::cross(a - o, b - o); };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && turn(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && turn(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
        hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
}

inline double shoelace(const std::vector<Point2>& p) {
    double twice = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Point2 a = p[i];
        const Point2 b = p[(i + 1) % p.size()];
        twice += a.x * b.y - a.y * b.x;
    }
    return 0.5 * twice;
}

struct Line {
    double a, b, c;  // a x + b y <= c
};

// Edge lines of a CCW vertex list, computed from the raw vertices.
inline std::vector<Line> edge_lines(const std::vector<Point2>& v) {
    std::vector<Line> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point2 p = v[i];
        const Point2 q = v[(i + 1) % v.size()];
        const double a = q.y - p.y;
        const double b = p.x - q.x;
        const double len = std::hypot(a, b);
        out.push_back({a / len, b / len, (a * p.x + b * p.y) / len});
    }
    return out;
}

// Area of the intersection of two convex polygons by halfspace enumeration:
// every pairwise line intersection that satisfies all halfspaces is a
// candidate vertex; the hull of the candidates is the intersection.
inline double intersection_area(const std::vector<Point2>& a, const std::vector<Point2>& b,
                                double slack) {
    auto lines = edge_lines(a);
    const auto lb = edge_lines(b);
    lines.insert(lines.end(), lb.begin(), lb.end());
    std::vector<Point2> candidates;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const double det = lines[i].a * lines[j].b - lines[i].b * lines[j].a;
            if (std::abs(det) < 1e-14) continue;
            const Point2 p{(lines[i].c * lines[j].b - lines[i].b * lines[j].c) / det,
                           (lines[i].a * lines[j].c - lines[i].c * lines[j].a) / det};
            bool inside = true;
            for (const Line& l : lines) {
                if (l.a * p.x + l.b * p.y - l.c > slack) {
                    inside = false;
                    break;
                }
            }
            if (inside) candidates.push_back(p);
        }
    }
    const auto hull = convex_hull(candidates);
    return hull.size() < 3 ? 0.0 : shoelace(hull);
}

// Random convex polygon with 3..max_edges vertices: hull of points on a
// randomly placed circle or ellipse at random sorted angles.
inline std::vector<Point2> random_convex(polyloc::Rng& rng, int min_edges, int max_edges) {
    for (;;) {
        const int n = min_edges + static_cast<int>(rng.uniform() * (max_edges - min_edges + 1));
        const Point2 center{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        const double rx = rng.uniform(0.5, 3.0);
        const double ry = rx * rng.uniform(0.3, 1.0);
        const double tilt = rng.uniform(0.0, std::numbers::pi);
        std::vector<Point2> pts;
        for (int k = 0; k < n; ++k) {
            const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double x = rx * std::cos(t);
            const double y = ry * std::sin(t);
            pts.push_back({center.x + x * std::cos(tilt) - y * std::sin(tilt),
                           center.y + x * std::sin(tilt) + y * std::cos(tilt)});
        }
        auto hull = convex_hull(pts);
        if (hull.size() >= 3 && shoelace(hull) > 1e-3) return hull;
    }
}

// Returns an empty string when `poly` satisfies the ConvexPolygon
// invariants, otherwise a description of the first violation.
inline std::string convexity_violation(const polyloc::ConvexPolygon& poly) {
    const auto& v = poly.vertices();
    const auto& h = poly.halfspaces();
    const double s = poly.scale();
    if (v.size() < 3) return "fewer than 3 vertices";
    if (h.size() != v.size()) return "halfspace count differs from vertex count";
    if (shoelace(v) <= 0.0) return "not counter-clockwise";
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point2 e1 = v[(i + 1) % v.size()] - v[i];
        const Point2 e2 = v[(i + 2) % v.size()] - v[(i + 1) % v.size()];
        if (polyloc::cross(e1, e2) < -1e-9 * s * s) return "reflex vertex";
        if (std::abs(polyloc::norm(h[i].normal) - 1.0) > 1e-12) return "normal not unit";
    }
    for (const auto& hs : h) {
        for (const Point2& p : v) {
            if (hs.signed_distance(p) > 1e-9 * s) return "vertex outside a halfspace";
        }
    }
    return {};
}

// Asymptotic one-sample Kolmogorov-Smirnov critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

// sup |F_emp - F| for sorted samples.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

}  // namespace oracle
