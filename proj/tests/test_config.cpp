#include "doctest.h"

#include "finray/config.hpp"
#include "finray/errors.hpp"
#include "finray/report.hpp"
#include "finray/rng.hpp"

#include <filesystem>
#include <string>

using namespace finray;
namespace fs = std::filesystem;

namespace {

const fs::path kPresets = fs::path(FINRAY_SOURCE_DIR) / "presets";

template <class E, class Fn>
std::string message_of(Fn&& fn) {
    try {
        fn();
    } catch (const E& e) {
        return e.what();
    }
    FAIL("expected exception");
    return {};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("finray_test_config_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

RunConfig random_config(Rng& rng) {
    RunConfig c;
    FinRayDesign d = rng.below(2) ? baby_preset() : original_preset();
    d.name = "d" + std::to_string(rng.below(1000));
    d.length = rng.uniform(45.0, 70.0);
    d.rib_count = 2 + static_cast<int>(rng.below(4));
    d.rib_angle_deg = rng.uniform(-5.0, 15.0);
    d.gel_pad.thickness = rng.uniform(2.0, 3.0);  // stays above the 1.68 mm pad sagitta
    d.materials["tpu"].youngs_modulus = rng.uniform(10.0, 40.0);
    c.designs.push_back(build_design(d));
    if (rng.below(2)) c.designs.push_back(original_preset());
    c.protocol.max_depth = rng.uniform(1.0, 6.0);
    c.protocol.steps = 1 + static_cast<int>(rng.below(40));
    c.protocol.cylinder = Indenter::circle(rng.uniform(2.0, 8.0));
    c.protocol.cuboid = Indenter::rectangle(rng.uniform(5.0, 12.0), rng.uniform(5.0, 12.0));
    c.protocol.indentation.mesh_size = rng.uniform(0.3, 1.5);
    c.protocol.indentation.self_contact = rng.below(2) == 1;
    c.protocol.indentation.solve.newton_tol_rel = rng.uniform(1e-9, 1e-5);
    c.protocol.indentation.solve.max_newton_iters = 5 + static_cast<int>(rng.below(50));
    if (rng.below(2)) c.protocol.compliance_depths = {rng.uniform(0.5, 1.0), rng.uniform(1.0, 2.0)};
    c.protocol.threads = static_cast<int>(rng.below(5));
    c.optics.scene.fov_deg = rng.uniform(30.0, 170.0);
    c.optics.scene.window_margin = rng.uniform(0.0, 5.0);
    c.optics.scene.ribs_block = rng.below(2) == 1;
    c.optics.rays = 2 + static_cast<int>(rng.below(2000));
    c.imaging.threshold = rng.uniform(0.05, 0.95);
    c.imaging.min_blob_px = static_cast<int>(rng.below(100));
    c.output_dir = "out/run" + std::to_string(rng.below(100));
    c.seed = rng.next();
    return c;
}

}  // namespace

TEST_CASE("config: shipped presets are valid and match the built-ins") {
    const RunConfig c = parse_config(kPresets / "baby.json");
    REQUIRE(c.designs.size() == 1);
    CHECK(emit_design(c.designs[0]) == emit_design(baby_preset()));
    CHECK(emit_design(load_design((kPresets / "original.json").string())) == emit_design(original_preset()));
    CHECK(load_design("baby").name == "baby");
    CHECK(c.protocol.max_depth == ProtocolSettings{}.max_depth);
    CHECK(c.seed == 42u);
}

TEST_CASE("config: unknown keys are rejected with their path") {
    const std::string top = message_of<UnknownKey>([] { parse_config_text(R"({"name": "x", "colour": "red"})"); });
    CHECK(top.find("colour") != std::string::npos);
    const std::string nested =
        message_of<UnknownKey>([] { parse_config_text(R"({"name": "x", "gel_pad": {"colour": 1}})"); });
    CHECK(nested.find("gel_pad.colour") != std::string::npos);
    CHECK_THROWS_AS(parse_config_text(R"({"solver": {"tolerance": 1}})"), UnknownKey);
    CHECK_THROWS_AS(parse_config_text(R"({"name": "x", "material_ids": {"spine": "tpu"}})"), UnknownKey);
    CHECK_THROWS_AS(parse_synth_text(R"({"shape": "circle", "colour": 3})", 1), UnknownKey);
}

TEST_CASE("config: missing required keys") {
    CHECK_THROWS_AS(parse_design_text(R"({"length": 50})"), MissingRequired);
    CHECK_THROWS_AS(parse_config_text(R"({"designs": [{"length": 50}]})"), MissingRequired);
    CHECK_THROWS_AS(parse_raytrace_text(R"({"camera": {"position": [0, 0]}, "sensing": [[1, 0], [1, 1]]})"),
                    MissingRequired);
}

TEST_CASE("config: syntax errors carry a line number") {
    const std::string msg = message_of<ParseError>([] { parse_config_text("{\n  \"name\": \"x\",\n  \"length\": ,\n}\n"); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK_THROWS_AS(parse_config_text(R"({"name": 3})"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"protocol": {"steps": 2.5}})"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"protocol": {"cylinder": "triangle:3"}})"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"name": "x", "designs": ["baby"]})"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[1, 2]"), ParseError);
}

TEST_CASE("config: values outside their domain are rejected") {
    CHECK_THROWS_AS(parse_config_text(R"({"protocol": {"max_depth": 0}})"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"optics": {"fov_deg": 180}})"), ParseError);
    CHECK_THROWS_AS(parse_config_text(R"({"imaging": {"threshold": 1.0}})"), ParseError);
    CHECK_THROWS(parse_config_text(R"({"solver": {"load_steps": 0}})"));
    CHECK_THROWS_AS(parse_config_text(R"({"name": "x", "length": -5})"), InvalidDesign);
}

TEST_CASE("config: defaults fill omitted sections") {
    const RunConfig c = parse_config_text("{}");
    CHECK(c.designs.empty());
    CHECK(c.protocol.steps == ProtocolSettings{}.steps);
    CHECK(c.optics.rays == 721);
    CHECK(c.imaging.threshold == 0.25);
    CHECK(c.output_dir == "out");
    const RunConfig d = parse_config_text(R"({"designs": ["baby", "original"], "seed": 7})");
    REQUIRE(d.designs.size() == 2);
    CHECK(d.designs[1].name == "original");
    CHECK(d.seed == 7u);
}

TEST_CASE("config: design paths resolve against the config file") {
    const fs::path dir = scratch_dir("paths");
    write_text_file(dir / "designs" / "mine.json", emit_design(baby_preset()));
    write_text_file(dir / "run.json", R"({"designs": ["designs/mine.json", "original"]})");
    const RunConfig c = parse_config(dir / "run.json");
    REQUIRE(c.designs.size() == 2);
    CHECK(c.designs[0].name == "baby");

    write_text_file(dir / "broken.json", R"({"designs": ["designs/none.json"]})");
    const std::string msg = message_of<IoError>([&] { parse_config(dir / "broken.json"); });
    CHECK(msg.find("broken.json") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("config: emit and parse round trip (random configs)") {
    Rng rng(11);
    for (int t = 0; t < 25; ++t) {
        const RunConfig c = random_config(rng);
        const std::string once = emit_config(c);
        const RunConfig back = parse_config_text(once);
        CHECK(emit_config(back) == once);
        REQUIRE(back.designs.size() == c.designs.size());
        CHECK(back.designs[0].length == c.designs[0].length);
        CHECK(back.protocol.cylinder.radius == c.protocol.cylinder.radius);
        CHECK(back.protocol.indentation.solve.newton_tol_rel == c.protocol.indentation.solve.newton_tol_rel);
        CHECK(back.protocol.compliance_depths == c.protocol.compliance_depths);
        CHECK(back.optics.rays == c.optics.rays);
        CHECK(back.seed == c.seed);
        CHECK(back.output_dir == c.output_dir);
    }
}

TEST_CASE("raytrace config: explicit scene and design fallback") {
    const auto rc = parse_raytrace_text(R"({
        "label": "flat",
        "camera": {"position": [0, 0], "boresight": [0, 2], "fov_deg": 90},
        "mirror": {"vertices": [[-5, 10], [5, 10]]},
        "sensing": [[-2, 1], [2, 1]],
        "occluders": [[[10, 10], [11, 10], [11, 11]]],
        "rays": 33
    })");
    CHECK(rc.scene.label == "flat");
    CHECK(rc.scene.camera.boresight.y == 1.0);
    CHECK(rc.scene.mirror.segment_count() == 1);
    CHECK(rc.scene.occluders.polygons.size() == 1);
    CHECK(rc.rays == 33);

    const auto from_design = parse_raytrace_text(R"({"designs": ["baby"], "optics": {"rays": 101}})");
    CHECK(from_design.rays == 101);
    CHECK(from_design.scene.mirror.segment_count() >= 1);
    CHECK_THROWS_AS(parse_raytrace_text("{}"), MissingRequired);
}

TEST_CASE("synth config: cases, defaults and round trip") {
    const auto single = parse_synth_text(R"({"shape": "rect", "rect_width": 5, "rect_height": 10})", 9);
    REQUIRE(single.cases.size() == 1);
    CHECK(single.cases[0].name == "press");
    CHECK(single.cases[0].scene.shape == SyntheticScene::Shape::rectangle);
    CHECK(single.cases[0].scene.seed == 9u);

    const auto multi = parse_synth_text(R"({
        "threshold": 0.3,
        "raw": {"noise_sigma": 0.5},
        "cases": [{"name": "ball", "radius": 2.375, "seed": 5}, {"shape": "textured", "frequency": 0.5}]
    })", 9);
    REQUIRE(multi.cases.size() == 2);
    CHECK(multi.pipeline.threshold == 0.3);
    CHECK(multi.pipeline.raw.noise_sigma == 0.5);
    CHECK(multi.cases[0].scene.seed == 5u);
    CHECK(multi.cases[1].name == "case1");
    const std::string emitted = emit_synth_config(multi);
    CHECK(emit_synth_config(parse_synth_text(emitted, 0)) == emitted);

    CHECK_THROWS_AS(parse_synth_text(R"({"cases": [{"name": "a"}, {"name": "a"}]})", 1), ParseError);
    CHECK_THROWS_AS(parse_synth_text(R"({"shape": "circle", "cases": [{}]})", 1), ParseError);
    CHECK_THROWS_AS(parse_synth_text(R"({"shape": "hexagon"})", 1), ParseError);
    CHECK_THROWS_AS(parse_synth_text(R"({"raw": {"quad": [[0, 0], [1, 0], [1, 1]]}})", 1), ParseError);
}
