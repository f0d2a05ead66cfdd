#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace finray {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
/// Counter-clockwise perpendicular.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }
/// Exact at both ends: lerp(a, b, 0) == a and lerp(a, b, 1) == b bitwise.
constexpr Vec2 lerp(Vec2 a, Vec2 b, double t) { return a * (1.0 - t) + b * t; }

using Polygon = std::vector<Vec2>;
using Polyline = std::vector<Vec2>;

/// Signed shoelace area; positive for counter-clockwise vertex order.
double signed_area(std::span<const Vec2> poly);
double polyline_length(std::span<const Vec2> line);
/// Point at arc length `s` along the polyline (clamped to its ends).
Vec2 point_at_arclength(std::span<const Vec2> line, double s);
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);
/// True when no two non-adjacent edges of the closed polygon intersect.
bool is_simple(std::span<const Vec2> poly);

struct SegmentHit {
    double t = 0.0;  ///< ray parameter (distance for unit directions)
    double u = 0.0;  ///< segment parameter in [0, 1]
};

/// Intersection of the ray origin + t * dir (t > t_min) with segment [a, b].
std::optional<SegmentHit> ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b, double t_min = 0.0);

/// Proper or touching intersection test of two closed segments.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Reflection of point p across the infinite line through a and b.
Vec2 reflect_point(Vec2 p, Vec2 a, Vec2 b);

}  // namespace finray
