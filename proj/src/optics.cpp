#include "finray/optics.hpp"

#include "finray/errors.hpp"
#include "finray/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

namespace finray {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kMaxFov = 179.9;
constexpr double kGeomTol = 1e-9;

double angle_between(Vec2 a, Vec2 b) { return std::atan2(std::abs(cross(a, b)), dot(a, b)); }

struct Segment {
    Vec2 a, b;
};

// Occluder polygons reduced to their union boundary: edges shared by two
// polygons (same endpoints, either order) cancel.
std::vector<Segment> boundary_edges(const SceneOccluders& occ) {
    std::map<std::pair<std::pair<double, double>, std::pair<double, double>>, std::pair<int, Segment>> count;
    for (const auto& poly : occ.polygons) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
            auto ka = std::make_pair(a.x, a.y), kb = std::make_pair(b.x, b.y);
            if (kb < ka) std::swap(ka, kb);
            auto& e = count[{ka, kb}];
            ++e.first;
            e.second = {a, b};
        }
    }
    std::vector<Segment> out;
    for (const auto& [k, v] : count)
        if (v.first == 1) out.push_back(v.second);
    return out;
}

// True when the open segment p -> q properly crosses any edge; contacts within
// kGeomTol of either end of p -> q do not count.
bool crosses(Vec2 p, Vec2 q, const std::vector<Segment>& edges, int skip = -1) {
    const Vec2 d = q - p;
    const double len = norm(d);
    if (len == 0.0) return false;
    const double lo = std::min(kGeomTol / len, 0.5), hi = 1.0 - lo;
    const double minx = std::min(p.x, q.x), maxx = std::max(p.x, q.x);
    const double miny = std::min(p.y, q.y), maxy = std::max(p.y, q.y);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (static_cast<int>(i) == skip) continue;
        const Segment& s = edges[i];
        if (std::max(s.a.x, s.b.x) < minx || std::min(s.a.x, s.b.x) > maxx || std::max(s.a.y, s.b.y) < miny ||
            std::min(s.a.y, s.b.y) > maxy)
            continue;
        const Vec2 e = s.b - s.a;
        const double denom = cross(d, e);
        if (denom == 0.0) continue;
        const Vec2 w = s.a - p;
        const double t = cross(w, e) / denom;
        const double u = cross(w, d) / denom;
        if (t > lo && t < hi && u >= 0.0 && u <= 1.0) return true;
    }
    return false;
}

struct Sample {
    Vec2 point;
    double s = 0.0;
};

std::vector<Sample> sample_sensing(const Polyline& sensing, int n) {
    if (n < 2) throw InvalidArgument("ray_count must be >= 2");
    if (sensing.size() < 2) throw InvalidArgument("sensing polyline needs at least two vertices");
    const double len = polyline_length(sensing);
    if (!(len > 0.0)) throw InvalidArgument("sensing polyline has zero length");
    std::vector<Sample> out;
    for (int i = 0; i < n; ++i) {
        const double s = len * i / (n - 1);
        const Vec2 p = i == 0 ? sensing.front() : (i == n - 1 ? sensing.back() : point_at_arclength(sensing, s));
        out.push_back({p, s});
    }
    return out;
}

enum class Method { aimed, virtual_camera, direct };

// Finds, for every sample, the unblocked path with the smallest off-boresight
// angle. `half_fov` limits that angle (radians).
class Tracer {
public:
    Tracer(const Camera2D& cam, const MirrorPolyline* mirror, const SceneOccluders& occ, Method method)
        : cam_(cam), mirror_(mirror), method_(method), occ_(boundary_edges(occ)) {
        cam_.validate();
        if (mirror_) {
            mirror_->validate();
            if (method_ == Method::virtual_camera && mirror_->segment_count() != 1)
                throw InvalidArgument("virtual-camera tracing needs a single flat mirror segment");
            for (std::size_t i = 0; i + 1 < mirror_->vertices.size(); ++i)
                mirror_edges_.push_back({mirror_->vertices[i], mirror_->vertices[i + 1]});
        }
    }

    SampleTrace trace(const Sample& smp, double half_fov) const {
        SampleTrace best;
        best.point = smp.point;
        best.arclength = smp.s;
        best.angle_deg = std::numeric_limits<double>::infinity();
        const Vec2 p = smp.point;
        if (method_ == Method::direct) {
            const double ang = angle_between(p - cam_.position, cam_.boresight);
            if (ang <= half_fov + kGeomTol && !crosses(cam_.position, p, occ_)) {
                best.hit = true;
                best.angle_deg = ang / kDeg;
            }
            return best;
        }
        for (std::size_t k = 0; k < mirror_edges_.size(); ++k) {
            const Vec2 a = mirror_edges_[k].a, b = mirror_edges_[k].b;
            const double side = mirror_->reflective_left ? 1.0 : -1.0;
            if (!(side * cross(b - a, cam_.position - a) > 0.0) || !(side * cross(b - a, p - a) > 0.0)) continue;
            Vec2 h;
            double ang;
            if (method_ == Method::aimed) {
                const Vec2 image = reflect_point(p, a, b);
                const Vec2 dir = image - cam_.position;
                const auto hit = hit_within(cam_.position, dir, a, b);
                if (!hit) continue;
                h = *hit;
                ang = angle_between(dir, cam_.boresight);
            } else {
                const Camera2D v = virtual_camera(cam_, a, b);
                const Vec2 dir = p - v.position;
                const auto hit = hit_within(v.position, dir, a, b);
                if (!hit) continue;
                h = *hit;
                ang = angle_between(dir, v.boresight);
            }
            if (ang > half_fov + kGeomTol || ang / kDeg >= best.angle_deg) continue;
            if (crosses(cam_.position, h, occ_) || crosses(h, p, occ_)) continue;
            if (crosses(cam_.position, h, mirror_edges_, static_cast<int>(k)) ||
                crosses(h, p, mirror_edges_, static_cast<int>(k)))
                continue;
            best.hit = true;
            best.segment = static_cast<int>(k);
            best.mirror_point = h;
            best.angle_deg = ang / kDeg;
        }
        return best;
    }

private:
    Camera2D cam_;
    const MirrorPolyline* mirror_;
    Method method_;
    std::vector<Segment> occ_;
    std::vector<Segment> mirror_edges_;

    // Point where origin + t dir meets [a, b], with t in (0, 1] and a
    // kGeomTol allowance at the segment ends.
    static std::optional<Vec2> hit_within(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
        const Vec2 e = b - a;
        const double denom = cross(dir, e);
        if (denom == 0.0) return std::nullopt;
        const Vec2 w = a - origin;
        const double t = cross(w, e) / denom;
        const double u = cross(w, dir) / denom;
        const double tol = kGeomTol / norm(e);
        if (!(t > 0.0 && t <= 1.0) || u < -tol || u > 1.0 + tol) return std::nullopt;
        return a + e * std::clamp(u, 0.0, 1.0);
    }
};

CoverageResult run_coverage(const Tracer& tracer, const Camera2D& cam, const Polyline& sensing, int n) {
    const auto samples = sample_sensing(sensing, n);
    CoverageResult r;
    double covered = 0.0, total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        SampleTrace t = tracer.trace(samples[i], 0.5 * cam.fov_deg * kDeg);
        if (!t.hit) t.angle_deg = 0.0;
        const double w = (i == 0 || i + 1 == samples.size()) ? 0.5 : 1.0;
        total += w;
        if (t.hit) covered += w;
        r.hit_map.push_back(t.hit);
        r.samples.push_back(t);
    }
    r.fraction = covered / total;
    return r;
}

double run_min_fov(const Tracer& tracer, const Polyline& sensing, int n) {
    const auto samples = sample_sensing(sensing, n);
    double worst = 0.0;
    std::vector<std::size_t> blocked;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SampleTrace t = tracer.trace(samples[i], 0.5 * kMaxFov * kDeg);
        if (!t.hit)
            blocked.push_back(i);
        else
            worst = std::max(worst, t.angle_deg);
    }
    if (!blocked.empty()) throw Unreachable(std::move(blocked));
    return 2.0 * worst;
}

}  // namespace

void Camera2D::validate() const {
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw InvalidArgument("camera fov must lie in (0, 180) degrees");
    if (!(std::abs(norm(boresight) - 1.0) < 1e-9)) throw InvalidArgument("camera boresight must be a unit vector");
}

void MirrorPolyline::validate() const {
    if (vertices.size() < 2) throw DegenerateMirror("mirror needs at least two vertices");
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
        if (vertices[i] == vertices[i + 1]) throw DegenerateMirror("mirror segment " + std::to_string(i) + " has zero length");
}

std::optional<Ray2> reflect(const Ray2& ray, Vec2 a, Vec2 b) {
    if (a == b) return std::nullopt;
    const auto hit = ray_segment(ray.origin, ray.dir, a, b, 0.0);
    if (!hit) return std::nullopt;
    const Vec2 n = normalized(perp(b - a));
    const Vec2 d = ray.dir - n * (2.0 * dot(ray.dir, n));
    return Ray2{ray.origin + ray.dir * hit->t, d};
}

Camera2D virtual_camera(const Camera2D& camera, Vec2 a, Vec2 b) {
    if (a == b) throw DegenerateMirror("mirror line has zero length");
    const Vec2 n = normalized(perp(b - a));
    Camera2D v = camera;
    v.position = reflect_point(camera.position, a, b);
    v.boresight = camera.boresight - n * (2.0 * dot(camera.boresight, n));
    return v;
}

CoverageResult coverage(const Camera2D& camera, const MirrorPolyline& mirror, const Polyline& sensing,
                        const SceneOccluders& occluders, int ray_count) {
    return run_coverage(Tracer(camera, &mirror, occluders, Method::aimed), camera, sensing, ray_count);
}

CoverageResult coverage_virtual(const Camera2D& camera, const MirrorPolyline& mirror, const Polyline& sensing,
                                const SceneOccluders& occluders, int ray_count) {
    return run_coverage(Tracer(camera, &mirror, occluders, Method::virtual_camera), camera, sensing, ray_count);
}

CoverageResult coverage_direct(const Camera2D& camera, const Polyline& sensing, const SceneOccluders& occluders,
                               int ray_count) {
    return run_coverage(Tracer(camera, nullptr, occluders, Method::direct), camera, sensing, ray_count);
}

double min_fov(const Camera2D& camera, const MirrorPolyline& mirror, const Polyline& sensing,
               const SceneOccluders& occluders, int ray_count) {
    return run_min_fov(Tracer(camera, &mirror, occluders, Method::aimed), sensing, ray_count);
}

double min_fov_direct(const Camera2D& camera, const Polyline& sensing, const SceneOccluders& occluders, int ray_count) {
    return run_min_fov(Tracer(camera, nullptr, occluders, Method::direct), sensing, ray_count);
}

// -----------------------------------------------------------------------------
// Fin Ray scene
// -----------------------------------------------------------------------------

OpticalScene fin_ray_scene(const FinRayDesign& design, const SceneOptions& options) {
    const Mesh2D mesh = generate_mesh(design, options.mesh_size);
    return fin_ray_scene(design, mesh, std::vector<Vec2>(mesh.nodes.size()), options);
}

OpticalScene fin_ray_scene(const FinRayDesign& design, const Mesh2D& mesh, const std::vector<Vec2>& u,
                           const SceneOptions& options) {
    if (u.size() != mesh.nodes.size()) throw DimensionMismatch("displacement count does not match the mesh");
    if (!(options.window_margin >= 0.0)) throw InvalidArgument("window_margin must be >= 0");
    auto pos = [&](std::size_t n) { return mesh.nodes[n] + u[n]; };
    auto chain = [&](const std::string& set) {
        Polyline out;
        for (std::size_t n : mesh.set(set)) out.push_back(pos(n));
        return out;
    };

    OpticalScene sc;
    sc.deformed = std::any_of(u.begin(), u.end(), [](Vec2 v) { return v.x != 0.0 || v.y != 0.0; });
    sc.label = design.name + (sc.deformed ? " (deformed geometry, extension)" : " (nominal)");
    sc.mirror.vertices = chain("back_face");
    sc.sensing = chain("gel_face");

    // Camera sits at the base midway between the inner strut faces.
    const auto& front_inner = mesh.set("front_inner");
    const auto& back_face = mesh.set("back_face");
    sc.camera.position = (mesh.nodes[front_inner.front()] + mesh.nodes[back_face.front()]) * 0.5;
    const Vec2 target = point_at_arclength(sc.mirror.vertices, 0.5 * polyline_length(sc.mirror.vertices));
    sc.camera.boresight = normalized(target - sc.camera.position);
    sc.camera.fov_deg = options.fov_deg;
    const Vec2 m0 = sc.mirror.vertices.front(), m1 = sc.mirror.vertices.back();
    sc.mirror.reflective_left = cross(m1 - m0, sc.camera.position - m0) > 0.0;

    const StrutFrame f = strut_frame(design);
    const double face_len = norm(f.front_top - f.front_base);
    const Vec2 dir = (f.front_top - f.front_base) / face_len;
    const double s_mid = design.gel_pad.center_fraction * face_len;
    const double w_lo = s_mid - 0.5 * design.gel_pad.chord_length - options.window_margin;
    const double w_hi = s_mid + 0.5 * design.gel_pad.chord_length + options.window_margin;
    for (const auto& tri : mesh.elements) {
        const Vec2 c = (mesh.nodes[tri.nodes[0]] + mesh.nodes[tri.nodes[1]] + mesh.nodes[tri.nodes[2]]) / 3.0;
        bool blocks = tri.region == region::tip || (options.ribs_block && tri.region == region::ribs);
        if (tri.region == region::front_strut) {
            const double s = dot(c - f.front_base, dir);
            blocks = s < w_lo || s > w_hi;
        }
        if (blocks) sc.occluders.polygons.push_back({pos(tri.nodes[0]), pos(tri.nodes[1]), pos(tri.nodes[2])});
    }

    std::map<std::pair<std::size_t, std::size_t>, int> edges;
    for (const auto& tri : mesh.elements)
        for (int k = 0; k < 3; ++k) {
            std::size_t a = tri.nodes[k], b = tri.nodes[(k + 1) % 3];
            if (b < a) std::swap(a, b);
            ++edges[{a, b}];
        }
    for (const auto& [e, n] : edges)
        if (n == 1) sc.context.push_back({pos(e.first), pos(e.second)});
    return sc;
}

std::string ray_diagram_svg(const OpticalScene& scene, const CoverageResult& result, int max_drawn) {
    const Camera2D& cam = scene.camera;
    const Vec2 m0 = scene.mirror.vertices.front(), m1 = scene.mirror.vertices.back();
    const Camera2D virt = virtual_camera(cam, m0, m1);

    Vec2 lo = cam.position, hi = cam.position;
    auto grow = [&](Vec2 p) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    };
    for (const auto& e : scene.context)
        for (Vec2 p : e) grow(p);
    for (Vec2 p : scene.sensing) grow(p);
    grow(virt.position);
    lo = lo - Vec2{4, 4};
    hi = hi + Vec2{4, 4};

    SvgCanvas svg(lo, hi, 8.0);
    for (const auto& e : scene.context) svg.polyline(e, "#999999", 0.8);
    for (const auto& poly : scene.occluders.polygons) svg.polyline(poly, "none", 0.0, true, "#bbbbbb", 0.6);
    svg.polyline(scene.mirror.vertices, "#1f77b4", 2.5);
    svg.polyline(scene.sensing, "#ff7f0e", 2.5);

    const double reach = norm(hi - lo);
    for (double sgn : {-1.0, 1.0}) {
        const double a = sgn * 0.5 * cam.fov_deg * kDeg;
        const Vec2 d{cam.boresight.x * std::cos(a) - cam.boresight.y * std::sin(a),
                     cam.boresight.x * std::sin(a) + cam.boresight.y * std::cos(a)};
        svg.line(cam.position, cam.position + d * (0.25 * reach), "#2ca02c", 1.0, true);
    }
    svg.line(m0, m1, "#1f77b4", 0.8, true);

    const std::size_t n = result.samples.size();
    const std::size_t stride = std::max<std::size_t>(1, (n + static_cast<std::size_t>(std::max(max_drawn, 1)) - 1) /
                                                            static_cast<std::size_t>(std::max(max_drawn, 1)));
    for (std::size_t i = 0; i < n; i += stride) {
        const SampleTrace& t = result.samples[i];
        if (t.hit && t.segment >= 0) {
            svg.polyline({cam.position, t.mirror_point, t.point}, "#d62728", 0.5);
            svg.line(virt.position, t.mirror_point, "#d62728", 0.3, true);
        } else if (t.hit) {
            svg.line(cam.position, t.point, "#d62728", 0.5);
        }
    }
    for (const auto& t : result.samples)
        if (!t.hit) svg.circle(t.point, 0.3, "#000000", "#000000");

    svg.circle(cam.position, 1.0, "#2ca02c", "#2ca02c");
    svg.circle(virt.position, 1.0, "#2ca02c", "none");
    svg.text(cam.position + Vec2{1.5, -1.5}, "camera " + fmt_fixed(cam.fov_deg, 1) + " deg");
    svg.text(virt.position + Vec2{1.5, -1.5}, "virtual camera");
    svg.text({lo.x + 1, hi.y - 2}, scene.label + ", coverage " + fmt_fixed(result.fraction, 4));
    return svg.str();
}

void write_coverage_csv(std::ostream& os, const CoverageResult& result) {
    csv_row(os, {"sample", "s_mm", "x", "y", "hit", "segment", "mirror_x", "mirror_y", "angle_deg"});
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
        const auto& t = result.samples[i];
        const bool bounce = t.hit && t.segment >= 0;
        csv_row(os, {std::to_string(i), fmt(t.arclength), fmt(t.point.x), fmt(t.point.y), t.hit ? "1" : "0",
                     std::to_string(t.segment), bounce ? fmt(t.mirror_point.x) : "", bounce ? fmt(t.mirror_point.y) : "",
                     t.hit ? fmt(t.angle_deg) : ""});
    }
}

}  // namespace finray
