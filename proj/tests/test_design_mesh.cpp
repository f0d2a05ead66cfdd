#include "doctest.h"

#include "finray/design.hpp"
#include "finray/errors.hpp"
#include "finray/mesh.hpp"

#include <cmath>
#include <sstream>

using namespace finray;

namespace {

// Independent shoelace sum, written out longhand.
double shoelace_oracle(const Polygon& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::size_t j = (i + 1 == p.size()) ? 0 : i + 1;
        s += p[i].x * p[j].y - p[j].x * p[i].y;
    }
    return std::fabs(s) / 2.0;
}

double perimeter(const Polygon& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += norm(p[(i + 1) % p.size()] - p[i]);
    return s;
}

bool on_polygon_boundary(Vec2 q, const Polygon& p, double tol) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2 a = p[i], b = p[(i + 1) % p.size()];
        const Vec2 ab = b - a;
        const double t = std::clamp(dot(q - a, ab) / dot(ab, ab), 0.0, 1.0);
        if (norm(a + ab * t - q) <= tol) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("baby preset builds a valid half-length design") {
    const FinRayDesign d = baby_preset();
    CHECK(d.length == 55.0);
    CHECK(d.rib_count == 4);
    REQUIRE(d.ribs.size() == 4);
    for (std::size_t i = 0; i < d.ribs.size(); ++i) {
        CHECK(d.ribs[i].front_lo > 0.0);
        CHECK(d.ribs[i].back_hi < d.cavity_top);
        if (i > 0) CHECK(d.ribs[i].front_lo > d.ribs[i - 1].front_hi);
    }
    CHECK(d.material_ids.at("gel_pad") == "gel");
}

TEST_CASE("original preset adds the rigid insert and camera patch") {
    const FinRayDesign d = original_preset();
    CHECK(d.variant_flags.rigid_insert);
    REQUIRE(d.variant_flags.rigid_back_patch.has_value());
    CHECK(d.material_ids.count("insert") == 1);
    const Mesh2D m = generate_mesh(d, 1.0);
    bool has_insert = false, has_camera = false;
    for (const auto& t : m.elements) {
        has_insert |= t.region == region::insert;
        has_camera |= t.region == region::camera_patch;
    }
    CHECK(has_insert);
    CHECK(has_camera);

    // Same geometry as the baby finger: only materials differ.
    const Mesh2D baby = generate_mesh(baby_preset(), 1.0);
    CHECK(baby.nodes == m.nodes);
    REQUIRE(baby.elements.size() == m.elements.size());
    for (std::size_t e = 0; e < m.elements.size(); ++e) CHECK(baby.elements[e].nodes == m.elements[e].nodes);
}

TEST_CASE("invalid drafts are rejected") {
    FinRayDesign d;
    SUBCASE("rib_count 0") { d.rib_count = 0; }
    SUBCASE("negative thickness") { d.front_strut_thickness = -1.0; }
    SUBCASE("overlapping ribs") { d.rib_thickness = 9.0; }
    SUBCASE("pad past the tip") { d.gel_pad.center_fraction = 0.8; }
    SUBCASE("arc deeper than pad") { d.gel_pad.thickness = 1.0; }
    SUBCASE("unknown region") { d.material_ids["spleen"] = "tpu"; }
    SUBCASE("bad back patch") { d.variant_flags.rigid_back_patch = RigidBackPatch{30.0, 10.0}; }
    CHECK_THROWS_AS(build_design(d), InvalidDesign);
}

TEST_CASE("outline spans the finger length") {
    const Outline o = outline(baby_preset());
    const auto& frame = o.find("frame").vertices;
    double lo = 1e9, hi = -1e9;
    for (const Vec2& p : frame) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
    }
    CHECK(std::abs((hi - lo) - 55.0) < 1e-9);
    for (const auto& poly : o.polygons) CHECK(is_simple(poly.vertices));
    CHECK(o.area() > 0.0);
}

TEST_CASE("blunt symmetric draft has a mirror-symmetric frame") {
    FinRayDesign d;
    d.tip_offset = 0.0;
    d.rib_angle_deg = 0.0;
    d.front_strut_thickness = d.back_total_thickness();
    d = build_design(d);
    const Outline o = outline(d);
    const Polygon& frame = o.find("frame").vertices;
    const double mid = 0.5 * d.base_width;
    for (const Vec2& p : frame) CHECK(on_polygon_boundary({2.0 * mid - p.x, p.y}, frame, 1e-9));
}

TEST_CASE("outline area matches an independent shoelace sum") {
    const Outline o = outline(baby_preset());
    double oracle = 0.0;
    for (const auto& p : o.polygons) oracle += (p.hole ? -1.0 : 1.0) * shoelace_oracle(p.vertices);
    CHECK(o.area() == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("unit square meshes into two triangles") {
    const Mesh2D m = mesh_rectangle(1.0, 1.0, 1.0, "tpu");
    CHECK(m.elements.size() == 2);
    CHECK(m.area() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Fin Ray mesh invariants") {
    for (const auto& design : {baby_preset(), original_preset()}) {
        for (double h : {1.0, 0.5}) {
            CAPTURE(h);
            const Mesh2D m = generate_mesh(design, h);
            CHECK_NOTHROW(validate_mesh(m));
            const Outline o = outline(design, h);
            CHECK(std::abs(m.area() - o.area()) <= 1e-6 * o.area());
            CHECK(m.max_edge_length() <= 1.5 * h);
            for (const char* s : {"fixed_base", "gel_face", "front_face", "back_face", "front_outer", "back_outer"})
                CHECK_FALSE(m.set(s).empty());
            CHECK(m.rib_faces.size() == static_cast<std::size_t>(design.rib_count));

            // Conformity: mesh boundary is exactly the outline perimeter.
            double outline_perimeter = 0.0;
            for (const auto& p : o.polygons) outline_perimeter += perimeter(p.vertices);
            // The pad chord is interior to the mesh but lies on two outline polygons.
            Polyline chord;
            const StrutFrame f = strut_frame(design);
            for (const Vec2& v : o.find("gel_pad").vertices)
                if (std::abs(v.x - f.front_at(v.y, 0.0).x) < 1e-9) chord.push_back(v);
            CHECK(chord.size() >= 2);
            const double chord_len = norm(chord.back() - chord.front());
            CHECK(boundary_length(m) == doctest::Approx(outline_perimeter - 2.0 * chord_len).epsilon(1e-9));
        }
    }
}

TEST_CASE("gel face nodes lie on the pad arc") {
    const FinRayDesign d = baby_preset();
    const Mesh2D m = generate_mesh(d, 0.5);
    const StrutFrame f = strut_frame(d);
    const double face_len = norm(f.front_top - f.front_base);
    const Vec2 dir = (f.front_top - f.front_base) / face_len;
    const Vec2 mid = f.front_base + dir * (d.gel_pad.center_fraction * face_len);
    const Vec2 center = mid - f.front_inward * (d.gel_pad.thickness - d.gel_pad.face_radius);
    for (std::size_t id : m.set("gel_face")) CHECK(std::abs(norm(m.nodes[id] - center) - d.gel_pad.face_radius) < 1e-6);
}

TEST_CASE("halving max_edge grows the node count three to five fold") {
    const FinRayDesign d = baby_preset();
    const double coarse = static_cast<double>(generate_mesh(d, 0.5).nodes.size());
    const double fine = static_cast<double>(generate_mesh(d, 0.25).nodes.size());
    CHECK(fine / coarse >= 3.0);
    CHECK(fine / coarse <= 5.0);
}

TEST_CASE("meshing is deterministic and the exchange format round-trips") {
    const FinRayDesign d = original_preset();
    std::ostringstream a, b;
    write_mesh(a, generate_mesh(d, 0.75));
    write_mesh(b, generate_mesh(d, 0.75));
    CHECK(a.str() == b.str());

    std::istringstream in(a.str());
    const Mesh2D back = read_mesh(in);
    CHECK(back == generate_mesh(d, 0.75));
    CHECK(a.str().rfind("nodes ", 0) == 0);
}

TEST_CASE("malformed mesh text is a parse error") {
    std::istringstream in("nodes 2 elements 1\n0 0\n1 0\n");
    CHECK_THROWS_AS(read_mesh(in), ParseError);
}
