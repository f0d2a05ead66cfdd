#include "finray/geometry.hpp"

#include <algorithm>

namespace finray {

double signed_area(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        twice += cross(poly[i], poly[(i + 1) % n]);
    }
    return 0.5 * twice;
}

double polyline_length(std::span<const Vec2> line) {
    double len = 0.0;
    for (std::size_t i = 1; i < line.size(); ++i) len += norm(line[i] - line[i - 1]);
    return len;
}

Vec2 point_at_arclength(std::span<const Vec2> line, double s) {
    if (line.empty()) return {};
    if (s <= 0.0) return line.front();
    for (std::size_t i = 1; i < line.size(); ++i) {
        const double seg = norm(line[i] - line[i - 1]);
        if (s <= seg && seg > 0.0) return lerp(line[i - 1], line[i], s / seg);
        s -= seg;
    }
    return line.back();
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    const double scale = std::max({norm(b - a), norm(c - a), 1e-300});
    if (std::abs(v) <= 1e-12 * scale * scale) return 0;
    return v > 0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool is_simple(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        if (a == b) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            // adjacent edges share a vertex by construction
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return false;
        }
    }
    return true;
}

std::optional<SegmentHit> ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b, double t_min) {
    const Vec2 e = b - a;
    const double denom = cross(dir, e);
    if (denom == 0.0) return std::nullopt;
    const Vec2 w = a - origin;
    const double t = cross(w, e) / denom;
    const double u = cross(w, dir) / denom;
    if (t <= t_min || u < 0.0 || u > 1.0) return std::nullopt;
    return SegmentHit{t, u};
}

Vec2 reflect_point(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double t = dot(p - a, d) / dot(d, d);
    const Vec2 foot = a + d * t;
    return foot * 2.0 - p;
}

}  // namespace finray
