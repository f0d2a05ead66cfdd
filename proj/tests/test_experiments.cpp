#include "doctest.h"

#include "finray/errors.hpp"
#include "finray/experiments.hpp"
#include "finray/report.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

using namespace finray;

namespace {

ForceDisplacementCurve make_curve(const std::string& design, std::vector<CurveSample> samples) {
    ForceDisplacementCurve c;
    c.scenario = {design, "circle:5", ProbeLocation::finger_pad};
    c.samples = std::move(samples);
    return c;
}

ProtocolSettings coarse_settings() {
    ProtocolSettings s;
    s.indentation.mesh_size = 1.0;
    s.steps = 10;
    return s;
}

bool same_samples(const ForceDisplacementCurve& a, const ForceDisplacementCurve& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i].depth != b.samples[i].depth || a.samples[i].force != b.samples[i].force) return false;
    return true;
}

}  // namespace

TEST_CASE("probe locations") {
    CHECK(probe_fraction(ProbeLocation::finger_pad) == 0.40);
    CHECK(probe_fraction(ProbeLocation::fingertip) == 0.85);
    CHECK(probe_location_from_string("fingertip") == ProbeLocation::fingertip);
    CHECK(probe_location_from_string("finger_pad") == ProbeLocation::finger_pad);
    CHECK_THROWS_AS(probe_location_from_string("knuckle"), InvalidArgument);
    // Pad probe lands on the gel; the tip probe is above it.
    CHECK(front_surface_point(baby_preset(), 0.40).on_gel);
    CHECK_FALSE(front_surface_point(baby_preset(), 0.85).on_gel);
}

TEST_CASE("run_indentation argument handling") {
    const auto baby = baby_preset();
    const auto c = run_indentation(baby, Indenter::circle(5), ProbeLocation::finger_pad, 0.0, 20);
    REQUIRE(c.samples.size() == 1);
    CHECK(c.samples[0].depth == 0.0);
    CHECK(c.samples[0].force == 0.0);
    CHECK_THROWS_AS(run_indentation(baby, Indenter::circle(5), ProbeLocation::finger_pad, -1.0, 20), InvalidArgument);
    CHECK_THROWS_AS(run_indentation(baby, Indenter::circle(5), ProbeLocation::finger_pad, 1.0, 0), InvalidArgument);
}

TEST_CASE("indentation curve invariants") {
    IndentationOptions opt;
    opt.mesh_size = 1.0;
    const auto run = simulate_indentation(baby_preset(), Indenter::circle(5), ProbeLocation::finger_pad, 3.0, 6, opt);
    const auto& c = run.curve;
    REQUIRE(c.samples.size() == 7);
    CHECK(c.samples[0].depth == 0.0);
    CHECK(c.samples[0].force == 0.0);
    for (std::size_t i = 1; i < c.samples.size(); ++i) {
        CHECK(c.samples[i].depth > c.samples[i - 1].depth);
        CHECK(c.samples[i].force >= c.samples[i - 1].force);
    }
    CHECK(c.samples.back().depth == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(c.warnings.empty());
    CHECK(run.final_state.displacements.size() == run.mesh.nodes.size());
}

TEST_CASE("doubling moduli doubles forces for the linear model") {
    FinRayDesign d = baby_preset();
    d.materials = with_model(d.materials, MaterialModel::linear_elastic);
    FinRayDesign stiff = d;
    stiff.materials = scale_moduli(d.materials, 2.0);
    IndentationOptions opt;
    opt.mesh_size = 1.0;
    opt.solve.newton_tol_rel = 1e-9;
    opt.solve.newton_tol_abs = 1e-8;
    const auto a = run_indentation(d, Indenter::circle(5), ProbeLocation::finger_pad, 2.0, 4, opt);
    const auto b = run_indentation(stiff, Indenter::circle(5), ProbeLocation::finger_pad, 2.0, 4, opt);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 1; i < a.samples.size(); ++i) {
        CHECK(b.samples[i].depth == a.samples[i].depth);
        CHECK(std::abs(b.samples[i].force - 2.0 * a.samples[i].force) <= 1e-6 * std::abs(2.0 * a.samples[i].force));
    }
}

TEST_CASE("solver errors carry scenario context and keep their type") {
    FinRayDesign d = baby_preset();
    IndentationOptions opt;
    opt.mesh_size = 1.0;
    opt.solve.max_newton_iters = 1;
    opt.solve.max_step_cuts = 0;
    try {
        run_indentation(d, Indenter::circle(5), ProbeLocation::finger_pad, 5.0, 1, opt);
        FAIL("expected a solver error");
    } catch (const NonConvergence& e) {
        CHECK(std::string(e.what()).find("baby/circle:5/finger_pad: ") == 0);
        CHECK(e.step() == 1);
    }
}

TEST_CASE("compare_compliance arithmetic") {
    const auto b = make_curve("ref", {{0, 0}, {1, 2}, {2, 6}, {3, 9}});
    SUBCASE("identical curves give zero") {
        const auto r = compare_compliance(b, b, {0.0, 0.5, 1.0, 2.5, 3.0});
        for (const auto& e : r.entries) CHECK(e.reduction_pct == 0.0);
        CHECK(r.min_reduction == 0.0);
        CHECK(r.max_reduction == 0.0);
    }
    SUBCASE("half force gives fifty percent") {
        const auto a = make_curve("half", {{0, 0}, {1, 1}, {2, 3}, {3, 4.5}});
        const auto r = compare_compliance(a, b, {0.5, 1.0, 1.7, 3.0});
        REQUIRE(r.entries.size() == 4);
        for (const auto& e : r.entries) CHECK(e.reduction_pct == doctest::Approx(50.0).epsilon(1e-12));
        CHECK(r.entries[0].design == "half");
        CHECK(r.entries[0].reference == "ref");
    }
    SUBCASE("linear interpolation between samples") {
        CHECK(b.force_at(1.5) == doctest::Approx(4.0).epsilon(1e-15));
        CHECK(b.force_at(2.25) == doctest::Approx(6.75).epsilon(1e-15));
    }
    SUBCASE("depth outside either curve") {
        const auto shorter = make_curve("short", {{0, 0}, {1, 1}});
        CHECK_THROWS_AS(compare_compliance(shorter, b, {2.0}), DepthOutOfRange);
        CHECK_THROWS_AS(compare_compliance(b, shorter, {2.0}), DepthOutOfRange);
        CHECK_THROWS_AS(compare_compliance(b, b, {-0.1}), DepthOutOfRange);
    }
    SUBCASE("zero reference force") {
        const auto flat = make_curve("flat", {{0, 0}, {1, 0}});
        CHECK_THROWS_AS(compare_compliance(b, flat, {1.0}), InvalidArgument);
    }
}

TEST_CASE("sampled depths use the sample exactly") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.1, 3.0);
    std::vector<CurveSample> s{{0, 0}};
    double d = 0, f = 0;
    for (int i = 0; i < 50; ++i) s.push_back({d += U(rng), f += U(rng)});
    const auto c = make_curve("x", s);
    for (const auto& p : s) CHECK(c.force_at(p.depth) == p.force);
}

TEST_CASE("softer-design ranking survives uniform force scaling") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.1, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<CurveSample> sa{{0, 0}}, sb{{0, 0}};
        for (int i = 1; i <= 5; ++i) {
            sa.push_back({double(i), U(rng)});
            sb.push_back({double(i), U(rng)});
        }
        const double k = std::exp(U(rng) - 2.5);
        auto sa2 = sa, sb2 = sb;
        for (auto& p : sa2) p.force *= k;
        for (auto& p : sb2) p.force *= k;
        const auto r1 = compare_compliance(make_curve("a", sa), make_curve("b", sb), {1.5, 3, 4.2});
        const auto r2 = compare_compliance(make_curve("a", sa2), make_curve("b", sb2), {1.5, 3, 4.2});
        for (std::size_t i = 0; i < r1.entries.size(); ++i) {
            CHECK((r1.entries[i].reduction_pct > 0) == (r2.entries[i].reduction_pct > 0));
            CHECK(r2.entries[i].reduction_pct == doctest::Approx(r1.entries[i].reduction_pct).epsilon(1e-9));
        }
    }
}

TEST_CASE("protocol: swapping design order swaps labels only, runs are deterministic") {
    auto s = coarse_settings();
    s.threads = 3;
    const auto ab = fig5_protocol({baby_preset(), original_preset()}, s);
    s.threads = 1;
    const auto ab1 = fig5_protocol({baby_preset(), original_preset()}, s);
    const auto ba = fig5_protocol({original_preset(), baby_preset()}, s);
    REQUIRE(ab.failures.empty());
    REQUIRE(ba.failures.empty());
    REQUIRE(ab.curves.size() == 8);
    REQUIRE(ba.curves.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(same_samples(ab.curves[i], ab1.curves[i]));
        CHECK(ab.curves[i].scenario.key() == ab1.curves[i].scenario.key());
        const auto& mirror = ba.curves[(i + 4) % 8];
        CHECK(same_samples(ab.curves[i], mirror));
        CHECK(ab.curves[i].scenario.design == mirror.scenario.design);
        CHECK(ab.curves[i].scenario.design != ba.curves[i].scenario.design);
        CHECK(ab.curves[i].scenario.indenter == mirror.scenario.indenter);
        CHECK(ab.curves[i].scenario.location == mirror.scenario.location);
    }
    std::ostringstream c1, c2;
    write_curve_csv(c1, ab.curves);
    write_curve_csv(c2, ab1.curves);
    CHECK(c1.str() == c2.str());
}

TEST_CASE("protocol at default resolution") {
    ProtocolSettings s;
    const auto r = fig5_protocol({baby_preset(), original_preset()}, s);
    REQUIRE(r.failures.empty());
    REQUIRE(r.curves.size() == 8);
    for (const auto& c : r.curves) {
        CHECK(c.samples.size() == 21);
        CHECK(c.samples.front().force == 0.0);
    }
    // Four scenario pairs, 20 sampled depths each minus the 0.25 mm step.
    CHECK(r.compliance.entries.size() == 4 * 19);
    for (const auto& e : r.compliance.entries) {
        CHECK(std::isfinite(e.reduction_pct));
        CHECK(e.reduction_pct > 0.0);
        CHECK(e.force < e.reference_force);
    }

    // Regression fixture: cuboid is stiffer than cylinder at the fingertip.
    for (const std::string design : {"baby", "original"}) {
        const auto* cyl = r.find(design, s.cylinder.describe(), ProbeLocation::fingertip);
        const auto* cub = r.find(design, s.cuboid.describe(), ProbeLocation::fingertip);
        REQUIRE(cyl);
        REQUIRE(cub);
        for (std::size_t i = 2; i < cyl->samples.size(); ++i) CHECK(cub->samples[i].force > cyl->samples[i].force);
    }

    const auto dir = std::filesystem::temp_directory_path() / "finray_fig5_test";
    std::filesystem::remove_all(dir);
    write_protocol_report(dir, r, s);
    const auto curves = read_text_file(dir / "curves.csv");
    CHECK(curves.rfind("design,indenter,location,step,depth_mm,force_N\n", 0) == 0);
    CHECK(read_text_file(dir / "compliance.csv").rfind("design,reference,", 0) == 0);
    const auto svg = read_text_file(dir / "fig5.svg");
    CHECK(svg.find("cylinder indenter") != std::string::npos);
    CHECK(svg.find("cuboid indenter") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("protocol input validation") {
    CHECK_THROWS_AS(fig5_protocol({baby_preset()}), InvalidArgument);
    CHECK_THROWS_AS(fig5_protocol({baby_preset(), baby_preset()}), InvalidArgument);
}

TEST_CASE("protocol keeps going past a failing scenario") {
    auto s = coarse_settings();
    s.indentation.solve.max_newton_iters = 1;
    s.indentation.solve.max_step_cuts = 0;
    s.steps = 1;
    s.threads = 2;
    const auto r = fig5_protocol({baby_preset(), original_preset()}, s);
    CHECK(r.curves.size() + r.failures.size() == 8);
    CHECK_FALSE(r.failures.empty());
}
