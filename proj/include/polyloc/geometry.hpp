#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "polyloc/rng.hpp"

namespace polyloc {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// {x | normal . x <= offset}, normal has unit length and points outward.
struct Halfspace {
    Point2 normal;
    double offset = 0.0;

    double signed_distance(Point2 p) const { return dot(normal, p) - offset; }
};

struct Rect {
    Point2 min;
    Point2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    double area() const { return width() * height(); }
    bool contains(Point2 p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
};

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Convex polygon with a counter-clockwise vertex list and the equivalent
// halfspace list; halfspace m is the supporting line of edge (v_m, v_{m+1}).
class ConvexPolygon {
public:
    // Throws std::invalid_argument unless the vertices form a counter-clockwise
    // convex polygon (within tolerance) with at least three distinct vertices.
    explicit ConvexPolygon(std::vector<Point2> vertices);

    static ConvexPolygon from_rect(const Rect& rect);

    const std::vector<Point2>& vertices() const { return vertices_; }
    const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
    std::size_t size() const { return vertices_.size(); }

    // Length scale used for all relative tolerances (bounding-box diagonal,
    // floored at 1e-12 m).
    double scale() const { return scale_; }

private:
    std::vector<Point2> vertices_;
    std::vector<Halfspace> halfspaces_;
    double scale_ = 0.0;
};

inline constexpr double kRelativeTolerance = 1e-9;
inline constexpr double kAbsoluteTolerance = 1e-12;

// Regular polygon whose inscribed circle is the disk (center, radius).
// Vertex m sits at angle angle_offset + m * 2pi / n_edges on the circumradius
// radius / cos(pi / n_edges).
ConvexPolygon circumscribed_disk_polygon(Point2 center, double radius, int n_edges,
                                         double angle_offset);

// Sutherland-Hodgman clip of `subject` against every halfspace of `clipper`.
// Returns nullopt when the intersection has no area.
std::optional<ConvexPolygon> clip(const ConvexPolygon& subject, const ConvexPolygon& clipper);

// Left fold of clip(); nullopt as soon as any partial intersection is empty.
std::optional<ConvexPolygon> intersect_all(std::span<const ConvexPolygon> polys);

// Shifts every edge line outward by `distance` and rebuilds the vertices as
// intersections of adjacent shifted lines. The result contains the Minkowski
// sum of `poly` and the disk of radius `distance`.
ConvexPolygon offset_outward(const ConvexPolygon& poly, double distance);

double signed_area(std::span<const Point2> vertices);
double area(const ConvexPolygon& poly);

// Boundary-inclusive membership with 1e-9 * scale slack.
bool contains(const ConvexPolygon& poly, Point2 p);

Rect bounding_rect(const ConvexPolygon& poly);
Rect bounding_rect(std::span<const Point2> points);

struct UniformSample {
    std::vector<Point2> points;
    std::size_t draws = 0;  // rectangle draws, accepted or not
};

// Acceptance-rejection sampling from the bounding rectangle.
UniformSample sample_uniform_counted(const ConvexPolygon& poly, std::size_t n, Rng& rng);
std::vector<Point2> sample_uniform(const ConvexPolygon& poly, std::size_t n, Rng& rng);

}  // namespace polyloc
