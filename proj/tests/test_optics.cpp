#include "doctest.h"

#include "finray/errors.hpp"
#include "finray/experiments.hpp"
#include "finray/optics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace finray;

namespace {

constexpr double kPi = std::numbers::pi;

double angle_to_normal(Vec2 d, Vec2 a, Vec2 b) {
    const Vec2 n = normalized(perp(b - a));
    return std::acos(std::min(1.0, std::abs(dot(d, n))));
}

// Point where the ray meets the infinite line through a and b.
Vec2 line_hit(Vec2 o, Vec2 d, Vec2 a, Vec2 b) {
    const Vec2 e = b - a;
    const double t = cross(a - o, e) / cross(d, e);
    return o + d * t;
}

}  // namespace

TEST_CASE("reflect: textbook cases") {
    const auto r = reflect({{0, 1}, normalized(Vec2{1, -1})}, {-5, 0}, {5, 0});
    REQUIRE(r);
    CHECK(r->dir.x == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(r->dir.y == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(r->origin.x == doctest::Approx(1.0));
    CHECK(std::abs(r->origin.y) < 1e-15);

    const auto back = reflect({{0, 3}, {0, -1}}, {-1, 0}, {1, 0});
    REQUIRE(back);
    CHECK(back->dir == Vec2{0, 1});

    CHECK_FALSE(reflect({{0, 1}, {0, 1}}, {-1, 0}, {1, 0}));    // pointing away
    CHECK_FALSE(reflect({{5, 1}, {0, -1}}, {-1, 0}, {1, 0}));   // past the segment end
    CHECK_FALSE(reflect({{0, 1}, {0, -1}}, {1, 0}, {1, 0}));    // degenerate
}

TEST_CASE("reflect: equal angles and involution on random rays") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-10, 10), A(0, 2 * kPi);
    int hits = 0;
    for (int i = 0; i < 2000; ++i) {
        const Vec2 a{U(rng), U(rng)}, b{U(rng), U(rng)};
        const Vec2 target = lerp(a, b, (U(rng) + 10) / 20);
        const Vec2 o{U(rng), U(rng)};
        if (norm(target - o) < 1e-3 || norm(b - a) < 1e-3) continue;
        const Ray2 ray{o, normalized(target - o)};
        const auto r = reflect(ray, a, b);
        if (!r) continue;
        ++hits;
        CHECK(std::abs(angle_to_normal(ray.dir, a, b) - angle_to_normal(r->dir, a, b)) < 1e-12);
        CHECK(std::abs(norm(r->dir) - 1.0) < 1e-12);
        // Reflecting the reflected direction across the same line restores it.
        const Vec2 n = normalized(perp(b - a));
        const Vec2 again = r->dir - n * (2 * dot(r->dir, n));
        CHECK(norm(again - ray.dir) < 1e-12);
    }
    CHECK(hits > 1500);
}

TEST_CASE("virtual camera") {
    const Camera2D cam{{0, 5}, {0, -1}, 90};
    const Camera2D v = virtual_camera(cam, {-1, 0}, {1, 0});
    CHECK(v.position.x == 0.0);
    CHECK(v.position.y == -5.0);
    CHECK(v.boresight.x == 0.0);
    CHECK(v.boresight.y == 1.0);
    CHECK(v.fov_deg == 90.0);

    const Camera2D on{{3, 0}, {0, 1}, 60};
    CHECK(virtual_camera(on, {-1, 0}, {1, 0}).position == Vec2{3, 0});
    CHECK_THROWS_AS(virtual_camera(cam, {1, 1}, {1, 1}), DegenerateMirror);
}

TEST_CASE("virtual camera rays land where reflected rays land") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-10, 10), A(-0.7, 0.7);
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Vec2 a{U(rng), U(rng)}, b{U(rng), U(rng)};
        if (norm(b - a) < 1.0) continue;
        const Vec2 n = normalized(perp(b - a));
        const Vec2 mid = lerp(a, b, 0.5);
        const Camera2D cam{mid + n * (2 + std::abs(U(rng))) + (b - a) * (0.1 * A(rng)), normalized(mid - (mid + n)), 120};
        Camera2D real = cam;
        real.boresight = normalized(mid - cam.position);
        const Camera2D v = virtual_camera(real, a, b);
        // Sensing line on the reflective side.
        const Vec2 s0 = mid + n * 1.0 + (b - a) * 2.0, s1 = mid + n * 1.5 - (b - a) * 2.0;
        for (int k = 0; k < 20; ++k) {
            const double ang = A(rng);
            const Vec2 d{real.boresight.x * std::cos(ang) - real.boresight.y * std::sin(ang),
                         real.boresight.x * std::sin(ang) + real.boresight.y * std::cos(ang)};
            const auto r = reflect({real.position, d}, a, b);
            if (!r) continue;
            const Vec2 p_real = line_hit(r->origin, r->dir, s0, s1);
            if (dot(p_real - r->origin, r->dir) <= 0) continue;
            const Vec2 dv = normalized(r->origin - v.position);
            const Vec2 p_virtual = line_hit(v.position, dv, s0, s1);
            CHECK(norm(p_real - p_virtual) < 1e-9);
            ++checked;
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("coverage: simple scenes") {
    // Mirror as back wall at y = 0, camera above looking down, sensing above.
    const MirrorPolyline wall{{{-20, 0}, {20, 0}}, true};
    const Polyline sensing{{-5, 10}, {5, 10}};
    const Camera2D cam{{0, 3}, {0, -1}, 170};
    const auto full = coverage(cam, wall, sensing, {}, 101);
    CHECK(full.fraction == 1.0);
    CHECK(full.hit_map.size() == 101);

    const Camera2D away{{0, 3}, {0, 1}, 1};
    CHECK(coverage(away, wall, sensing, {}, 101).fraction == 0.0);

    // Camera behind the reflective side sees nothing.
    const MirrorPolyline flipped{{{-20, 0}, {20, 0}}, false};
    CHECK(coverage(cam, flipped, sensing, {}, 11).fraction == 0.0);

    CHECK_THROWS_AS(coverage(cam, wall, sensing, {}, 1), InvalidArgument);
    CHECK_THROWS_AS(coverage({{0, 3}, {0, -1}, 180}, wall, sensing, {}, 11), InvalidArgument);
    CHECK_THROWS_AS(coverage(cam, MirrorPolyline{{{0, 0}}, true}, sensing, {}, 11), DegenerateMirror);
}

TEST_CASE("coverage: half weights at the ends") {
    const MirrorPolyline wall{{{-20, 0}, {20, 0}}, true};
    const Polyline sensing{{-5, 10}, {5, 10}};
    // A blocker over the left half of the sensing line.
    SceneOccluders occ;
    occ.polygons.push_back({{-30, 8}, {-0.01, 8}, {-0.01, 9}, {-30, 9}});
    const Camera2D cam{{0, 3}, {0, -1}, 170};
    const auto r = coverage(cam, wall, sensing, occ, 11);
    // Samples at x = 0..5 are visible: 5 interior + right end (half) = 5.5 of 10.
    CHECK(r.fraction == doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("min_fov: direct view and mirror equivalence") {
    const Camera2D cam{{0, 0}, {1, 0}, 60};
    const Polyline seg{{1, 1}, {1, -1}};
    CHECK(min_fov_direct(cam, seg, {}) == doctest::Approx(90.0).epsilon(1e-12));

    const MirrorPolyline mirror{{{0, -10}, {0, 10}}, false};
    const Camera2D real{{2, 0}, {-1, 0}, 60};
    const Camera2D v = virtual_camera(real, {0, -10}, {0, 10});
    const double via_mirror = min_fov(real, mirror, seg, {});
    CHECK(via_mirror == doctest::Approx(min_fov_direct(v, seg, {})).epsilon(1e-12));
    CHECK(via_mirror == doctest::Approx(2 * std::atan(1.0 / 3.0) * 180 / kPi).epsilon(1e-12));

    SceneOccluders wall;
    wall.polygons.push_back({{1.5, -20}, {1.7, -20}, {1.7, 20}, {1.5, 20}});
    try {
        min_fov(real, mirror, seg, wall, 5);
        FAIL("expected Unreachable");
    } catch (const Unreachable& e) {
        CHECK(e.blocked().size() == 5);
    }
}

TEST_CASE("flat-mirror equivalence and monotonicity on random scenes") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int trial = 0; trial < 40; ++trial) {
        const MirrorPolyline mirror{{{-10 + U(rng), U(rng)}, {10 + U(rng), U(rng)}}, true};
        const Polyline sensing{{-6 + U(rng), 8 + U(rng)}, {U(rng), 9 + U(rng)}, {6 + U(rng), 8 + U(rng)}};
        SceneOccluders occ;
        for (int k = 0; k < 3; ++k) {
            const Vec2 c{6 * U(rng), 4 + 2 * U(rng)};
            occ.polygons.push_back({c, c + Vec2{0.8, 0}, c + Vec2{0.8, 0.3}, c + Vec2{0, 0.3}});
        }
        Camera2D cam{{3 * U(rng), 2 + U(rng)}, normalized(Vec2{U(rng), -1}), 60 + 50 * (U(rng) + 1)};
        const auto fwd = coverage(cam, mirror, sensing, occ, 201);
        const auto vir = coverage_virtual(cam, mirror, sensing, occ, 201);
        CHECK(fwd.hit_map == vir.hit_map);

        double last = -1;
        for (double fov = 5; fov < 180; fov += 5) {
            cam.fov_deg = fov;
            const double f = coverage(cam, mirror, sensing, occ, 101).fraction;
            CHECK(f >= last);
            last = f;
        }
    }
}

TEST_CASE("nominal baby scene") {
    const OpticalScene sc = fin_ray_scene(baby_preset());
    CHECK_FALSE(sc.deformed);
    CHECK(sc.camera.fov_deg == 100.0);
    const auto r = coverage(sc.camera, sc.mirror, sc.sensing, sc.occluders, 721);
    CHECK(r.fraction == 1.0);
    const double need = min_fov(sc.camera, sc.mirror, sc.sensing, sc.occluders, 721);
    CHECK(need <= 120.0);
    CHECK(need <= 100.0);

    // Coverage at the computed minimum is complete, a hair below it is not.
    Camera2D c = sc.camera;
    c.fov_deg = need + 1e-6;
    CHECK(coverage(c, sc.mirror, sc.sensing, sc.occluders, 721).fraction == 1.0);
    c.fov_deg = need - 0.01;
    CHECK(coverage(c, sc.mirror, sc.sensing, sc.occluders, 721).fraction < 1.0);

    // Doubling the sample count moves the fraction by less than one sample weight.
    c.fov_deg = 0.5 * need;
    const double f1 = coverage(c, sc.mirror, sc.sensing, sc.occluders, 361).fraction;
    const double f2 = coverage(c, sc.mirror, sc.sensing, sc.occluders, 721).fraction;
    CHECK(std::abs(f1 - f2) < 1.0 / 360);

    const std::string svg = ray_diagram_svg(sc, r);
    CHECK(svg.find("virtual camera") != std::string::npos);
    std::ostringstream csv;
    write_coverage_csv(csv, r);
    CHECK(csv.str().rfind("sample,s_mm,x,y,hit,segment,mirror_x,mirror_y,angle_deg\n", 0) == 0);
}

TEST_CASE("closed strut window hides part of the pad") {
    SceneOptions opt;
    opt.window_margin = 0.0;
    const OpticalScene closed = fin_ray_scene(baby_preset(), opt);
    CHECK(coverage(closed.camera, closed.mirror, closed.sensing, closed.occluders, 201).fraction < 1.0);
    CHECK_THROWS_AS(min_fov(closed.camera, closed.mirror, closed.sensing, closed.occluders, 201), Unreachable);
}

TEST_CASE("deformed-geometry scene") {
    const auto baby = baby_preset();
    IndentationOptions io;
    io.mesh_size = 1.0;
    const auto run = simulate_indentation(baby, Indenter::circle(5), ProbeLocation::finger_pad, 3.0, 6, io);
    SceneOptions so;
    so.mesh_size = 1.0;
    const auto nominal = fin_ray_scene(baby, run.mesh, std::vector<Vec2>(run.mesh.nodes.size()), so);
    const auto bent = fin_ray_scene(baby, run.mesh, run.final_state.displacements, so);
    CHECK(bent.deformed);
    CHECK(bent.label.find("deformed") != std::string::npos);
    CHECK(bent.camera.position == nominal.camera.position);
    CHECK(bent.mirror.vertices.size() == nominal.mirror.vertices.size());
    CHECK(bent.sensing != nominal.sensing);
    const double f = coverage(bent.camera, bent.mirror, bent.sensing, bent.occluders, 361).fraction;
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK_THROWS_AS(fin_ray_scene(baby, run.mesh, std::vector<Vec2>(3), so), DimensionMismatch);
}
