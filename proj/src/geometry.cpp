#include "polyloc/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace polyloc {

namespace {

double tolerance_for(double scale) {
    return std::max(kRelativeTolerance * scale, kAbsoluteTolerance);
}

double diagonal(const Rect& r) { return std::hypot(r.width(), r.height()); }

// Drops consecutive (cyclic) vertices closer than `tol`.
std::vector<Point2> merge_close_vertices(const std::vector<Point2>& in, double tol) {
    std::vector<Point2> out;
    out.reserve(in.size());
    for (const Point2& p : in) {
        if (out.empty() || distance(out.back(), p) > tol) {
            out.push_back(p);
        }
    }
    while (out.size() > 1 && distance(out.back(), out.front()) <= tol) {
        out.pop_back();
    }
    return out;
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    const std::size_t n = vertices_.size();
    if (n < 3) {
        throw std::invalid_argument("convex polygon needs at least 3 vertices, got " +
                                    std::to_string(n));
    }
    for (const Point2& v : vertices_) {
        if (!is_finite(v)) {
            throw std::invalid_argument("convex polygon vertex is not finite");
        }
    }
    scale_ = std::max(diagonal(bounding_rect(vertices_)), kAbsoluteTolerance);
    if (signed_area(vertices_) <= 0.0) {
        throw std::invalid_argument("convex polygon must be counter-clockwise with positive area");
    }
    const double turn_tol = -kRelativeTolerance * scale_ * scale_;
    halfspaces_.reserve(n);
    for (std::size_t m = 0; m < n; ++m) {
        const Point2 a = vertices_[m];
        const Point2 b = vertices_[(m + 1) % n];
        const Point2 c = vertices_[(m + 2) % n];
        const Point2 edge = b - a;
        const double len = norm(edge);
        if (len == 0.0) {
            throw std::invalid_argument("convex polygon has a zero-length edge");
        }
        if (cross(edge, c - b) < turn_tol) {
            throw std::invalid_argument("convex polygon has a reflex vertex");
        }
        const Point2 normal{edge.y / len, -edge.x / len};
        halfspaces_.push_back({normal, dot(normal, a)});
    }
}

ConvexPolygon ConvexPolygon::from_rect(const Rect& rect) {
    return ConvexPolygon({rect.min, {rect.max.x, rect.min.y}, rect.max, {rect.min.x, rect.max.y}});
}

ConvexPolygon circumscribed_disk_polygon(Point2 center, double radius, int n_edges,
                                         double angle_offset) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("disk polygon radius must be positive and finite");
    }
    if (n_edges < 3) {
        throw std::invalid_argument("disk polygon needs at least 3 edges");
    }
    const double spacing = 2.0 * std::numbers::pi / n_edges;
    const double circumradius = radius / std::cos(spacing / 2.0);
    std::vector<Point2> vertices;
    vertices.reserve(static_cast<std::size_t>(n_edges));
    for (int m = 0; m < n_edges; ++m) {
        const double angle = angle_offset + m * spacing;
        vertices.push_back(
            {center.x + circumradius * std::cos(angle), center.y + circumradius * std::sin(angle)});
    }
    return ConvexPolygon(std::move(vertices));
}

std::optional<ConvexPolygon> clip(const ConvexPolygon& subject, const ConvexPolygon& clipper) {
    const double scale = std::max(subject.scale(), clipper.scale());
    std::vector<Point2> output = subject.vertices();
    std::vector<Point2> input;
    for (const Halfspace& h : clipper.halfspaces()) {
        if (output.empty()) {
            break;
        }
        input.swap(output);
        output.clear();
        const std::size_t n = input.size();
        for (std::size_t k = 0; k < n; ++k) {
            const Point2 prev = input[(k + n - 1) % n];
            const Point2 cur = input[k];
            const double d_prev = h.signed_distance(prev);
            const double d_cur = h.signed_distance(cur);
            const bool cur_in = d_cur <= 0.0;
            const bool prev_in = d_prev <= 0.0;
            if (cur_in != prev_in) {
                const double t = d_prev / (d_prev - d_cur);
                output.push_back(prev + t * (cur - prev));
            }
            if (cur_in) {
                output.push_back(cur);
            }
        }
    }

    std::vector<Point2> merged = merge_close_vertices(output, tolerance_for(scale));
    if (merged.size() < 3) {
        return std::nullopt;
    }
    if (signed_area(merged) < kAbsoluteTolerance * scale * scale) {
        return std::nullopt;
    }
    return ConvexPolygon(std::move(merged));
}

std::optional<ConvexPolygon> intersect_all(std::span<const ConvexPolygon> polys) {
    if (polys.empty()) {
        throw std::invalid_argument("intersect_all needs at least one polygon");
    }
    std::optional<ConvexPolygon> acc = polys.front();
    for (std::size_t k = 1; k < polys.size() && acc; ++k) {
        acc = clip(*acc, polys[k]);
    }
    return acc;
}

ConvexPolygon offset_outward(const ConvexPolygon& poly, double distance) {
    if (!(distance >= 0.0) || !std::isfinite(distance)) {
        throw std::invalid_argument("offset distance must be non-negative and finite");
    }
    const auto& vs = poly.vertices();
    const auto& hs = poly.halfspaces();
    const std::size_t n = vs.size();
    std::vector<Point2> shifted;
    shifted.reserve(n);
    for (std::size_t m = 0; m < n; ++m) {
        // Vertex m joins the line of edge m-1 and the line of edge m. Moving
        // both lines by `distance` moves their intersection by u with
        // n_prev . u = n_cur . u = distance.
        const Point2 n_prev = hs[(m + n - 1) % n].normal;
        const Point2 n_cur = hs[m].normal;
        const double denom = 1.0 + dot(n_prev, n_cur);
        if (denom <= kAbsoluteTolerance) {
            throw GeometryError("adjacent polygon edges are anti-parallel; cannot offset");
        }
        shifted.push_back(vs[m] + (distance / denom) * (n_prev + n_cur));
    }
    return ConvexPolygon(std::move(shifted));
}

double signed_area(std::span<const Point2> vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) {
        return 0.0;
    }
    // Shoelace about the first vertex to limit cancellation far from the origin.
    const Point2 origin = vertices[0];
    double twice = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        twice += cross(vertices[k] - origin, vertices[k + 1] - origin);
    }
    return 0.5 * twice;
}

double area(const ConvexPolygon& poly) { return signed_area(poly.vertices()); }

bool contains(const ConvexPolygon& poly, Point2 p) {
    const double slack = tolerance_for(poly.scale());
    for (const Halfspace& h : poly.halfspaces()) {
        if (h.signed_distance(p) > slack) {
            return false;
        }
    }
    return true;
}

Rect bounding_rect(std::span<const Point2> points) {
    if (points.empty()) {
        throw std::invalid_argument("bounding_rect of an empty point set");
    }
    Rect r{points.front(), points.front()};
    for (const Point2& p : points) {
        r.min.x = std::min(r.min.x, p.x);
        r.min.y = std::min(r.min.y, p.y);
        r.max.x = std::max(r.max.x, p.x);
        r.max.y = std::max(r.max.y, p.y);
    }
    return r;
}

Rect bounding_rect(const ConvexPolygon& poly) { return bounding_rect(poly.vertices()); }

UniformSample sample_uniform_counted(const ConvexPolygon& poly, std::size_t n, Rng& rng) {
    const Rect box = bounding_rect(poly);
    UniformSample out;
    out.points.reserve(n);
    while (out.points.size() < n) {
        const Point2 p{rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y)};
        ++out.draws;
        if (contains(poly, p)) {
            out.points.push_back(p);
        }
    }
    return out;
}

std::vector<Point2> sample_uniform(const ConvexPolygon& poly, std::size_t n, Rng& rng) {
    return sample_uniform_counted(poly, n, rng).points;
}

}  // namespace polyloc
