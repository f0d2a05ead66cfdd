// finray: command-line front end for the design, simulation, optics, imaging
// and materials modules.

#include "finray/config.hpp"
#include "finray/dataset.hpp"
#include "finray/errors.hpp"
#include "finray/experiments.hpp"
#include "finray/image.hpp"
#include "finray/imaging.hpp"
#include "finray/materials.hpp"
#include "finray/mesh.hpp"
#include "finray/optics.hpp"
#include "finray/report.hpp"
#include "finray/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#ifndef FINRAY_VERSION
#define FINRAY_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace finray;

namespace {

std::uint64_t g_seed = 42;

// -----------------------------------------------------------------------------
// Small helpers
// -----------------------------------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
    write_text_file(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

template <class Fn>
void write_stream(const fs::path& path, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write_file(path, os.str());
}

void write_image(const fs::path& path, const RasterImage& image) {
    write_ppm(path, image);
    std::cout << "wrote " << path.string() << "\n";
}

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::exception&) {
            throw InvalidArgument(what + ": '" + field + "' is not a number");
        }
    }
    if (v.size() != expected)
        throw InvalidArgument(what + ": expected " + std::to_string(expected) + " comma-separated numbers, got " +
                              std::to_string(v.size()));
    return v;
}

Quad parse_quad(const std::string& text) {
    const auto v = parse_numbers(text, 8, "--quad");
    return {Vec2{v[0], v[1]}, Vec2{v[2], v[3]}, Vec2{v[4], v[5]}, Vec2{v[6], v[7]}};
}

json base_record(const std::string& command) { return {{"command", command}, {"seed", g_seed}, {"version", FINRAY_VERSION}}; }

/// Resolved parameters of a run that writes a single file sit next to it.
fs::path sidecar(const fs::path& out) { return fs::path(out.string() + ".resolved_config.json"); }

std::string curve_svg(const ForceDisplacementCurve& c) {
    PlotSeries s{c.scenario.key(), "#1b9e77", false, {}};
    for (const auto& p : c.samples) s.points.emplace_back(p.depth, p.force);
    return svg_line_panels({PlotPanel{c.scenario.key(), "depth (mm)", "force (N)", {s}}});
}

// -----------------------------------------------------------------------------
// simulate / fig5 / mesh
// -----------------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string design = "baby";
    std::string indenter = "circle:5";
    std::string location = "finger_pad";
    std::optional<double> depth;
    std::optional<int> steps;
    std::optional<double> mesh_size;
    std::string out = "out/simulate";
};

void cmd_simulate(const SimulateArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : parse_config(a.config);
    FinRayDesign design = !a.config.empty() && !cfg.designs.empty() && a.design == "baby" ? cfg.designs.front()
                                                                                          : load_design(a.design);
    if (a.depth) cfg.protocol.max_depth = *a.depth;
    if (a.steps) cfg.protocol.steps = *a.steps;
    if (a.mesh_size) cfg.protocol.indentation.mesh_size = *a.mesh_size;
    cfg.seed = g_seed;
    cfg.output_dir = a.out;
    const Indenter ind = parse_indenter(a.indenter);
    const ProbeLocation loc = probe_location_from_string(a.location);

    const ForceDisplacementCurve curve =
        run_indentation(design, ind, loc, cfg.protocol.max_depth, cfg.protocol.steps, cfg.protocol.indentation);
    const fs::path dir = a.out;
    write_stream(dir / "curve.csv", [&](std::ostream& os) { write_curve_csv(os, {curve}); });
    write_file(dir / "curve.svg", curve_svg(curve));
    cfg.designs = {design};
    json rec = base_record("simulate");
    rec["indenter"] = ind.describe();
    rec["location"] = to_string(loc);
    rec["config"] = json::parse(emit_config(cfg));
    write_file(dir / "resolved_config.json", rec.dump(2) + "\n");
    for (const auto& w : curve.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << curve.scenario.key() << ": force at " << fmt(curve.max_depth()) << " mm = "
              << fmt(curve.samples.back().force) << " N\n";
}

struct Fig5Args {
    std::string config;
    std::vector<std::string> designs;
    std::optional<int> steps;
    std::optional<double> max_depth;
    std::optional<double> mesh_size;
    std::optional<int> threads;
    std::string out;
};

void cmd_fig5(const Fig5Args& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : parse_config(a.config);
    if (!a.designs.empty()) {
        cfg.designs.clear();
        for (const auto& d : a.designs) cfg.designs.push_back(load_design(d));
    } else if (cfg.designs.empty()) {
        cfg.designs = {baby_preset(), original_preset()};
    }
    if (a.steps) cfg.protocol.steps = *a.steps;
    if (a.max_depth) cfg.protocol.max_depth = *a.max_depth;
    if (a.mesh_size) cfg.protocol.indentation.mesh_size = *a.mesh_size;
    if (a.threads) cfg.protocol.threads = *a.threads;
    if (!a.out.empty()) cfg.output_dir = a.out;
    cfg.seed = g_seed;

    const ProtocolResult res = fig5_protocol(cfg.designs, cfg.protocol);
    const fs::path dir = cfg.output_dir;
    write_protocol_report(dir, res, cfg.protocol);
    for (const char* f : {"curves.csv", "compliance.csv", "fig5.svg"}) std::cout << "wrote " << (dir / f).string() << "\n";
    json rec = base_record("fig5");
    rec["config"] = json::parse(emit_config(cfg));
    write_file(dir / "resolved_config.json", rec.dump(2) + "\n");

    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    if (!res.failures.empty()) {
        std::string all;
        for (const auto& f : res.failures) all += (all.empty() ? "" : "; ") + f;
        throw NonConvergence(-1, -1, std::to_string(res.failures.size()) + " scenario(s) failed: " + all);
    }
    std::cout << cfg.designs[0].name << " vs " << cfg.designs[1].name << ": force reduction "
              << fmt_fixed(res.compliance.min_reduction, 1) << "% .. " << fmt_fixed(res.compliance.max_reduction, 1)
              << "%\n";
}

struct MeshArgs {
    std::string design = "baby";
    double size = 1.0;
    std::string out = "mesh.txt";
    std::string svg;
};

void cmd_mesh(const MeshArgs& a) {
    const FinRayDesign d = load_design(a.design);
    const Mesh2D mesh = generate_mesh(d, a.size);
    write_stream(a.out, [&](std::ostream& os) { write_mesh(os, mesh); });
    if (!a.svg.empty()) {
        Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
        for (const auto& p : mesh.nodes) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        SvgCanvas canvas(lo, hi, 10.0);
        for (const auto& t : mesh.elements) {
            const bool soft = t.region == region::gel_pad;
            canvas.polyline({mesh.nodes[t.nodes[0]], mesh.nodes[t.nodes[1]], mesh.nodes[t.nodes[2]]}, "#555555", 0.3,
                            true, soft ? "#f4a3a3" : "#cfd8e3", 1.0);
        }
        write_file(a.svg, canvas.str());
    }
    json rec = base_record("mesh");
    rec["max_edge"] = a.size;
    rec["design"] = json::parse(emit_design(d));
    write_file(sidecar(a.out), rec.dump(2) + "\n");
    std::cout << mesh.nodes.size() << " nodes, " << mesh.elements.size() << " elements, area " << fmt(mesh.area())
              << " mm^2\n";
}

// -----------------------------------------------------------------------------
// raytrace
// -----------------------------------------------------------------------------

struct RaytraceArgs {
    std::string scene;
    std::string design = "baby";
    std::optional<int> rays;
    std::optional<double> fov;
    std::optional<double> window_margin;
    bool ribs_block = false;
    std::string out = "out/raytrace";
};

void cmd_raytrace(const RaytraceArgs& a) {
    RaytraceConfig rc;
    if (!a.scene.empty()) {
        rc = parse_raytrace_config(a.scene);
    } else {
        SceneOptions opt;
        if (a.window_margin) opt.window_margin = *a.window_margin;
        opt.ribs_block = a.ribs_block;
        if (a.fov) opt.fov_deg = *a.fov;
        rc.scene = fin_ray_scene(load_design(a.design), opt);
    }
    if (a.rays) rc.rays = *a.rays;
    if (a.fov) rc.scene.camera.fov_deg = *a.fov;
    if (rc.rays < 2) throw InvalidArgument("--rays must be >= 2");

    const OpticalScene& s = rc.scene;
    const bool mirrored = s.mirror.segment_count() > 0;
    const CoverageResult cov = mirrored ? coverage(s.camera, s.mirror, s.sensing, s.occluders, rc.rays)
                                        : coverage_direct(s.camera, s.sensing, s.occluders, rc.rays);
    json need = nullptr;
    try {
        need = mirrored ? min_fov(s.camera, s.mirror, s.sensing, s.occluders, rc.rays)
                        : min_fov_direct(s.camera, s.sensing, s.occluders, rc.rays);
    } catch (const Unreachable& e) {
        std::cerr << "warning: " << e.what() << "\n";
    }

    const fs::path dir = a.out;
    write_stream(dir / "coverage.csv", [&](std::ostream& os) { write_coverage_csv(os, cov); });
    write_file(dir / "rays.svg", ray_diagram_svg(s, cov));
    json summary{{"label", s.label}, {"fov_deg", s.camera.fov_deg}, {"rays", rc.rays},
                 {"coverage", cov.fraction}, {"min_fov_deg", need}};
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    json rec = base_record("raytrace");
    rec["scene"] = a.scene.empty() ? json(a.design) : json(a.scene);
    rec["rays"] = rc.rays;
    rec["camera"] = {{"position", {s.camera.position.x, s.camera.position.y}},
                     {"boresight", {s.camera.boresight.x, s.camera.boresight.y}},
                     {"fov_deg", s.camera.fov_deg}};
    write_file(dir / "resolved_config.json", rec.dump(2) + "\n");
    std::cout << "coverage " << fmt(cov.fraction);
    if (!need.is_null()) std::cout << ", minimum fov " << fmt_fixed(need.get<double>(), 2) << " deg";
    std::cout << "\n";
}

// -----------------------------------------------------------------------------
// unwarp / localize / metrics / synth
// -----------------------------------------------------------------------------

struct UnwarpArgs {
    std::string in, quad, out;
    int width = 240, height = 135;
};

void cmd_unwarp(const UnwarpArgs& a) {
    const Quad q = parse_quad(a.quad);
    const RasterImage flat = unwarp(read_ppm(a.in), q, a.width, a.height);
    write_image(a.out, flat);
    json rec = base_record("unwarp");
    rec["in"] = a.in;
    rec["quad"] = json::array();
    for (const auto& p : q) rec["quad"].push_back({p.x, p.y});
    rec["width"] = a.width;
    rec["height"] = a.height;
    write_file(sidecar(a.out), rec.dump(2) + "\n");
}

struct LocalizeArgs {
    std::string in, ref, out, csv, diff;
    std::string name = "press";
    double threshold = 0.25;
    int min_blob = 20;
};

void cmd_localize(const LocalizeArgs& a) {
    const DiffImage d = difference(read_ppm(a.in), read_ppm(a.ref));
    const ContactMask m = localize(d, a.threshold, a.min_blob);
    write_image(a.out, m.to_image());
    if (!a.diff.empty()) write_image(a.diff, d.magnitude_image());
    if (!a.csv.empty()) {
        write_stream(a.csv, [&](std::ostream& os) {
            os << "case,centroid_x_px,centroid_y_px,area_px\n";
            const auto c = m.centroid();
            csv_row(os, {a.name, c ? fmt(c->x) : "", c ? fmt(c->y) : "", std::to_string(m.count())});
        });
    }
    json rec = base_record("localize");
    rec["in"] = a.in;
    rec["ref"] = a.ref;
    rec["threshold"] = a.threshold;
    rec["min_blob_px"] = a.min_blob;
    write_file(sidecar(a.out), rec.dump(2) + "\n");
    if (m.empty()) std::cout << "no contact found\n";
    else std::cout << "contact: " << m.count() << " px at (" << fmt_fixed(m.centroid()->x, 2) << ", "
                   << fmt_fixed(m.centroid()->y, 2) << ")\n";
}

struct MetricsArgs {
    std::string mask, truth, center, out;
    std::string name = "press";
};

void cmd_metrics(const MetricsArgs& a) {
    const ContactMask m = ContactMask::from_image(read_ppm(a.mask));
    const ContactMask t = ContactMask::from_image(read_ppm(a.truth));
    MetricRow row{a.name, std::numeric_limits<double>::quiet_NaN(), dice(m, t)};
    if (!a.center.empty()) {
        const auto c = parse_numbers(a.center, 2, "--center");
        row.center_error_px = center_error(m, {c[0], c[1]});
    }
    write_stream(a.out, [&](std::ostream& os) { write_metrics_csv(os, {row}); });
    json rec = base_record("metrics");
    rec["mask"] = a.mask;
    rec["truth"] = a.truth;
    rec["center"] = a.center;
    write_file(sidecar(a.out), rec.dump(2) + "\n");
}

struct SynthArgs {
    std::string scene;
    std::string out = "out/synth";
};

void cmd_synth(const SynthArgs& a) {
    SynthConfig cfg;
    if (a.scene.empty()) {
        cfg.cases.push_back({"ball", SyntheticScene{}});
        cfg.cases.back().scene.seed = g_seed;
    } else {
        cfg = parse_synth_config(a.scene, g_seed);
    }
    const fs::path dir = a.out;
    std::vector<MetricRow> rows;
    for (const auto& c : cfg.cases) {
        const PressEvaluation ev = evaluate_press(c.name, c.scene, cfg.pipeline);
        write_image(dir / (c.name + "_reference.ppm"), ev.render.reference);
        write_image(dir / (c.name + "_pressed.ppm"), ev.render.pressed);
        write_image(dir / (c.name + "_raw_reference.ppm"), ev.raw_reference);
        write_image(dir / (c.name + "_raw_pressed.ppm"), ev.raw_pressed);
        write_image(dir / (c.name + "_truth.ppm"), ev.render.truth_mask.to_image());
        write_image(dir / (c.name + "_mask.ppm"), ev.mask.to_image());
        rows.push_back(ev.metrics);
    }
    write_stream(dir / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, rows); });
    json rec = base_record("synth");
    rec["config"] = json::parse(emit_synth_config(cfg));
    write_file(dir / "resolved_config.json", rec.dump(2) + "\n");
    for (const auto& r : rows)
        std::cout << r.name << ": center error "
                  << (std::isnan(r.center_error_px) ? std::string("n/a") : fmt_fixed(r.center_error_px, 3) + " px")
                  << ", dice " << fmt_fixed(r.dice, 3) << "\n";
}

// -----------------------------------------------------------------------------
// tensile
// -----------------------------------------------------------------------------

struct TensileArgs {
    std::vector<std::string> in;
    double gauge = 33.0, width = 6.0, thickness = 2.0, drop = 0.5;
    std::string out, summary, svg, fixtures;
};

void cmd_tensile(const TensileArgs& a) {
    const DogboneSpec spec{a.gauge, a.width, a.thickness};
    spec.validate();
    std::vector<std::pair<std::string, StressStrainCurve>> curves;
    if (!a.fixtures.empty()) {
        if (!a.in.empty()) throw InvalidArgument("--fixtures and --in are exclusive");
        for (const auto& p : reference_paints()) {
            const TensileRecord r = synthetic_tensile_record(p, spec);
            write_stream(fs::path(a.fixtures) / (p.name + ".csv"), [&](std::ostream& os) { write_tensile_csv(os, r); });
            curves.emplace_back(p.name, to_stress_strain(r, spec));
        }
    }
    for (const auto& path : a.in) curves.emplace_back(fs::path(path).stem().string(), to_stress_strain(read_tensile_csv(path), spec));
    if (curves.empty()) throw InvalidArgument("give --in record.csv (repeatable) or --fixtures dir");
    if (!a.out.empty()) {
        if (curves.size() != 1) throw InvalidArgument("--out takes exactly one input curve");
        write_stream(a.out, [&](std::ostream& os) { write_stress_strain_csv(os, curves.front().second); });
    }
    const auto rows = summarize(curves, a.drop);
    if (!a.summary.empty()) write_stream(a.summary, [&](std::ostream& os) { write_summary_csv(os, rows); });
    if (!a.svg.empty()) write_file(a.svg, stress_strain_svg(curves));

    json rec = base_record("tensile");
    rec["inputs"] = a.in;
    rec["dogbone"] = {{"gauge_length", a.gauge}, {"width", a.width}, {"thickness", a.thickness}};
    rec["drop_fraction"] = a.drop;
    const fs::path anchor = !a.summary.empty() ? fs::path(a.summary)
                            : !a.out.empty()   ? fs::path(a.out)
                            : !a.fixtures.empty() ? fs::path(a.fixtures) / "fixtures"
                                                  : fs::path();
    if (!anchor.empty()) write_file(sidecar(anchor), rec.dump(2) + "\n");
    for (const auto& r : rows)
        std::cout << r.name << ": UTS " << fmt_fixed(r.uts_mpa, 3) << " MPa, elongation " << fmt_fixed(r.elongation_pct, 1) << "%"
                  << (r.broke ? "" : " (no break detected)") << "\n";
}

// -----------------------------------------------------------------------------
// classify
// -----------------------------------------------------------------------------

std::vector<std::pair<fs::path, LabeledImage>> read_labeled_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> classes;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) classes.push_back(e.path());
    std::sort(classes.begin(), classes.end());
    std::vector<std::pair<fs::path, LabeledImage>> out;
    for (const auto& c : classes) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(c))
            if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.push_back({f, {read_ppm(f), c.filename().string()}});
    }
    if (out.empty()) throw EmptyTrainingSet("no <label>/*.ppm images under " + dir.string());
    return out;
}

struct ClassifyArgs {
    std::string data, model, out;
    std::vector<std::string> in;
    int downsample = 4;
    int per_class = 100;
    double train_fraction = 0.8;
    bool augment = false;
};

void cmd_classify_corpus(const ClassifyArgs& a) {
    CorpusSettings cs;
    cs.per_class = a.per_class;
    const auto corpus = texture_corpus(cs, g_seed);
    std::map<std::string, int> counter;
    for (const auto& item : corpus) {
        const int k = counter[item.label]++;
        char name[32];
        std::snprintf(name, sizeof name, "%04d.ppm", k);
        write_ppm(fs::path(a.out) / item.label / name, item.image);
    }
    json rec = base_record("classify corpus");
    rec["per_class"] = a.per_class;
    rec["width"] = cs.width;
    rec["height"] = cs.height;
    rec["mm_per_pixel"] = cs.mm_per_pixel;
    for (const auto& c : cs.classes) rec["classes"][c.label] = c.frequency;
    write_file(fs::path(a.out) / "resolved_config.json", rec.dump(2) + "\n");
    std::cout << "wrote " << corpus.size() << " images under " << a.out << "\n";
}

void cmd_classify_fit(const ClassifyArgs& a) {
    const auto data = read_labeled_dir(a.data);
    std::vector<LabeledImage> images;
    for (const auto& d : data) images.push_back(d.second);
    const LabeledSplit split = split_images(images, a.train_fraction, g_seed);
    std::vector<LabeledImage> train = split.train;
    if (a.augment) {
        AugmentOps ops;
        ops.hflip = true;
        ops.brightness = 10.0;
        ops.crop_fraction = 0.9;
        const std::size_t n = train.size();
        for (std::size_t i = 0; i < n; ++i)
            train.push_back({augment(train[i].image, ops, g_seed + i), train[i].label});
    }
    const CentroidModel model = classify_fit(train, a.downsample);
    model.save(a.model);
    std::cout << "wrote " << a.model << "\n";
    const double acc = split.val.empty() ? std::nan("") : accuracy(model, split.val);
    json rec = base_record("classify fit");
    rec["data"] = a.data;
    rec["downsample"] = a.downsample;
    rec["train_fraction"] = a.train_fraction;
    rec["augment"] = a.augment;
    rec["train_count"] = split.train.size();
    rec["val_count"] = split.val.size();
    rec["val_accuracy"] = std::isnan(acc) ? json(nullptr) : json(acc);
    write_file(sidecar(a.model), rec.dump(2) + "\n");
    std::cout << "train " << split.train.size() << ", val " << split.val.size() << ", val accuracy "
              << (std::isnan(acc) ? std::string("n/a") : fmt_fixed(acc, 4)) << "\n";
}

void cmd_classify_predict(const ClassifyArgs& a) {
    const CentroidModel model = CentroidModel::load(a.model);
    std::vector<std::pair<fs::path, LabeledImage>> items;
    if (!a.data.empty()) items = read_labeled_dir(a.data);
    for (const auto& f : a.in) items.push_back({f, {read_ppm(f), ""}});
    if (items.empty()) throw InvalidArgument("give --in image.ppm (repeatable) or --data dir");

    std::ostringstream os;
    os << "file,predicted,label,correct\n";
    std::size_t labeled = 0, ok = 0;
    for (const auto& [path, item] : items) {
        const std::string p = model.predict(item.image);
        const bool has = !item.label.empty();
        labeled += has;
        ok += has && p == item.label;
        csv_row(os, {path.string(), p, item.label, has ? (p == item.label ? "1" : "0") : ""});
        if (a.out.empty()) std::cout << path.string() << ": " << p << "\n";
    }
    if (!a.out.empty()) {
        write_file(a.out, os.str());
        json rec = base_record("classify predict");
        rec["model"] = a.model;
        rec["inputs"] = a.in;
        rec["data"] = a.data;
        write_file(sidecar(a.out), rec.dump(2) + "\n");
    }
    if (labeled)
        std::cout << "accuracy " << fmt_fixed(static_cast<double>(ok) / static_cast<double>(labeled), 4) << " on "
                  << labeled << " labeled images\n";
}

void print_error(const std::string& command, const std::string& kind, const std::string& message) {
    json e{{"error", {{"command", command}, {"kind", kind}, {"message", message}}}};
    std::cerr << e.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finray: Fin Ray gripper design, simulation, optics and tactile-imaging workbench"};
    app.set_version_flag("--version", std::string("finray ") + FINRAY_VERSION);
    app.add_option("--seed", g_seed, "Seed for every stochastic step")->capture_default_str();
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Indent one design and write its force-displacement curve");
    c_sim->add_option("--config", sim.config, "Run config (JSON)");
    c_sim->add_option("--design", sim.design, "Design file or preset name (baby, original)")->capture_default_str();
    c_sim->add_option("--indenter", sim.indenter, "circle:R or rect:WxH (mm)")->capture_default_str();
    c_sim->add_option("--location", sim.location, "finger_pad or fingertip")->capture_default_str();
    c_sim->add_option("--depth", sim.depth, "Maximum depth (mm)");
    c_sim->add_option("--steps", sim.steps, "Load steps");
    c_sim->add_option("--mesh-size", sim.mesh_size, "Max element edge (mm)");
    c_sim->add_option("--out", sim.out, "Output directory")->capture_default_str();

    Fig5Args f5;
    auto* c_f5 = app.add_subcommand("fig5", "Run the two-design indentation protocol");
    c_f5->add_option("--config", f5.config, "Run config (JSON)");
    c_f5->add_option("--designs", f5.designs, "Two design files or preset names");
    c_f5->add_option("--steps", f5.steps, "Load steps");
    c_f5->add_option("--max-depth", f5.max_depth, "Maximum depth (mm)");
    c_f5->add_option("--mesh-size", f5.mesh_size, "Max element edge (mm)");
    c_f5->add_option("--threads", f5.threads, "Worker threads (0 = FINRAY_THREADS or all cores)");
    c_f5->add_option("--out", f5.out, "Output directory (default: config output_dir)");

    RaytraceArgs rt;
    auto* c_rt = app.add_subcommand("raytrace", "Mirror coverage of the sensing region");
    c_rt->add_option("scene", rt.scene, "Scene or run config (JSON)");
    c_rt->add_option("--design", rt.design, "Design when no scene file is given")->capture_default_str();
    c_rt->add_option("--rays", rt.rays, "Samples along the sensing region");
    c_rt->add_option("--fov", rt.fov, "Camera field of view (deg)");
    c_rt->add_option("--window-margin", rt.window_margin, "Strut opening beyond the pad ends (mm)");
    c_rt->add_flag("--ribs-block", rt.ribs_block, "Treat ribs as opaque");
    c_rt->add_option("--out", rt.out, "Output directory")->capture_default_str();

    UnwarpArgs uw;
    auto* c_uw = app.add_subcommand("unwarp", "Rectify the mirror quadrilateral of a raw frame");
    c_uw->add_option("--in", uw.in, "Raw frame (PPM)")->required();
    c_uw->add_option("--quad", uw.quad, "x1,y1,...,x4,y4: top-left, top-right, bottom-right, bottom-left")->required();
    c_uw->add_option("--out", uw.out, "Flat image (PPM)")->required();
    c_uw->add_option("--width", uw.width, "Output width")->capture_default_str();
    c_uw->add_option("--height", uw.height, "Output height")->capture_default_str();

    LocalizeArgs lz;
    auto* c_lz = app.add_subcommand("localize", "Difference against a reference and find the contact");
    c_lz->add_option("--in", lz.in, "Pressed flat image (PPM)")->required();
    c_lz->add_option("--ref", lz.ref, "Reference flat image (PPM)")->required();
    c_lz->add_option("--out", lz.out, "Contact mask (PPM)")->required();
    c_lz->add_option("--csv", lz.csv, "Result CSV");
    c_lz->add_option("--diff", lz.diff, "Difference magnitude image (PPM)");
    c_lz->add_option("--name", lz.name, "Case name in the CSV")->capture_default_str();
    c_lz->add_option("--threshold", lz.threshold, "Fraction of the peak difference")->capture_default_str();
    c_lz->add_option("--min-blob", lz.min_blob, "Smallest kept component (px)")->capture_default_str();

    MetricsArgs mt;
    auto* c_mt = app.add_subcommand("metrics", "Dice and centre error of a mask against ground truth");
    c_mt->add_option("--mask", mt.mask, "Predicted mask (PPM)")->required();
    c_mt->add_option("--truth", mt.truth, "Ground-truth mask (PPM)")->required();
    c_mt->add_option("--center", mt.center, "Ground-truth centre x,y (px)");
    c_mt->add_option("--name", mt.name, "Case name")->capture_default_str();
    c_mt->add_option("--out", mt.out, "Metrics CSV")->required();

    SynthArgs sy;
    auto* c_sy = app.add_subcommand("synth", "Render synthetic presses and score the pipeline on them");
    c_sy->add_option("--scene", sy.scene, "Synthetic scene file (JSON)");
    c_sy->add_option("--out", sy.out, "Output directory")->capture_default_str();

    TensileArgs tn;
    auto* c_tn = app.add_subcommand("tensile", "Stress-strain, UTS and elongation at break");
    c_tn->add_option("--in", tn.in, "Record CSV (extension_mm,force_N); repeatable");
    c_tn->add_option("--gauge", tn.gauge, "Gauge length (mm)")->capture_default_str();
    c_tn->add_option("--width", tn.width, "Gauge width (mm)")->capture_default_str();
    c_tn->add_option("--thickness", tn.thickness, "Gauge thickness (mm)")->capture_default_str();
    c_tn->add_option("--drop", tn.drop, "Break when stress falls below this fraction of the peak")->capture_default_str();
    c_tn->add_option("--out", tn.out, "Stress-strain CSV (single input)");
    c_tn->add_option("--summary", tn.summary, "Summary CSV");
    c_tn->add_option("--svg", tn.svg, "Stress-strain plot");
    c_tn->add_option("--fixtures", tn.fixtures, "Write the four reference paint records here and analyse them");

    ClassifyArgs cl;
    auto* c_cl = app.add_subcommand("classify", "Nearest-centroid texture classifier");
    c_cl->require_subcommand(1);
    auto* c_corpus = c_cl->add_subcommand("corpus", "Write a synthetic texture corpus as <label>/*.ppm");
    c_corpus->add_option("--out", cl.out, "Output directory")->required();
    c_corpus->add_option("--per-class", cl.per_class, "Images per class")->capture_default_str();
    auto* c_fit = c_cl->add_subcommand("fit", "Split, fit and report validation accuracy");
    c_fit->add_option("--data", cl.data, "Directory of <label>/*.ppm")->required();
    c_fit->add_option("--model", cl.model, "Model file to write (JSON)")->required();
    c_fit->add_option("--downsample", cl.downsample, "Feature block size (px)")->capture_default_str();
    c_fit->add_option("--train-fraction", cl.train_fraction, "Stratified training share")->capture_default_str();
    c_fit->add_flag("--augment", cl.augment, "Add one flipped, cropped, brightness-shifted copy per training image");
    auto* c_pred = c_cl->add_subcommand("predict", "Label images with a fitted model");
    c_pred->add_option("--model", cl.model, "Model file (JSON)")->required();
    c_pred->add_option("--in", cl.in, "Image (PPM); repeatable");
    c_pred->add_option("--data", cl.data, "Directory of <label>/*.ppm; adds accuracy");
    c_pred->add_option("--out", cl.out, "Predictions CSV");

    MeshArgs ms;
    auto* c_ms = app.add_subcommand("mesh", "Mesh a design and write the exchange file");
    c_ms->add_option("--design", ms.design, "Design file or preset name")->capture_default_str();
    c_ms->add_option("--size", ms.size, "Max element edge (mm)")->capture_default_str();
    c_ms->add_option("--out", ms.out, "Mesh file")->capture_default_str();
    c_ms->add_option("--svg", ms.svg, "Mesh drawing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name(), "UsageError",
                    e.what());
        return 2;
    }

    std::string command = app.get_subcommands().front()->get_name();
    try {
        if (c_sim->parsed()) cmd_simulate(sim);
        else if (c_f5->parsed()) cmd_fig5(f5);
        else if (c_rt->parsed()) cmd_raytrace(rt);
        else if (c_uw->parsed()) cmd_unwarp(uw);
        else if (c_lz->parsed()) cmd_localize(lz);
        else if (c_mt->parsed()) cmd_metrics(mt);
        else if (c_sy->parsed()) cmd_synth(sy);
        else if (c_tn->parsed()) cmd_tensile(tn);
        else if (c_ms->parsed()) cmd_mesh(ms);
        else if (c_cl->parsed()) {
            command += " " + c_cl->get_subcommands().front()->get_name();
            if (c_corpus->parsed()) cmd_classify_corpus(cl);
            else if (c_fit->parsed()) cmd_classify_fit(cl);
            else cmd_classify_predict(cl);
        }
    } catch (const Error& e) {
        print_error(command, e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error(command, "InternalError", e.what());
        return 3;
    }
    return 0;
}
