#include "finray/config.hpp"

#include "finray/errors.hpp"
#include "finray/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace finray {

using nlohmann::json;

namespace {

// -----------------------------------------------------------------------------
// Strict object reader: every key must be consumed, paths go into messages.
// -----------------------------------------------------------------------------

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParseError(where() + "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* get(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    const json& require(const std::string& key) {
        const json* v = get(key);
        if (!v) throw MissingRequired(key_path(key) + " is required");
        return *v;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) throw ParseError(key_path(key) + ": expected a number");
            out = v->get<double>();
        }
    }
    void integer(const std::string& key, int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) throw ParseError(key_path(key) + ": expected an integer");
            out = v->get<int>();
        }
    }
    void unsigned_integer(const std::string& key, std::uint64_t& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_unsigned()) throw ParseError(key_path(key) + ": expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = get(key)) {
            if (!v->is_boolean()) throw ParseError(key_path(key) + ": expected true or false");
            out = v->get<bool>();
        }
    }
    void string(const std::string& key, std::string& out) {
        if (const json* v = get(key)) {
            if (!v->is_string()) throw ParseError(key_path(key) + ": expected a string");
            out = v->get<std::string>();
        }
    }
    void vec2(const std::string& key, Vec2& out) {
        if (const json* v = get(key)) out = to_vec2(*v, key_path(key));
    }
    std::optional<Reader> object(const std::string& key) {
        if (const json* v = get(key)) return Reader(*v, key_path(key));
        return std::nullopt;
    }

    /// Rejects keys that were never asked for.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw UnknownKey("unknown key '" + key_path(it.key()) + "'");
    }

    static Vec2 to_vec2(const json& v, const std::string& path) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ParseError(path + ": expected [x, y]");
        return {v[0].get<double>(), v[1].get<double>()};
    }
    static std::vector<Vec2> to_points(const json& v, const std::string& path) {
        if (!v.is_array()) throw ParseError(path + ": expected a list of [x, y] points");
        std::vector<Vec2> pts;
        for (std::size_t i = 0; i < v.size(); ++i) pts.push_back(to_vec2(v[i], path + "[" + std::to_string(i) + "]"));
        return pts;
    }

private:
    std::string where() const { return path_.empty() ? "" : path_ + ": "; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        std::string msg = e.what();
        const auto colon = msg.rfind(": ");
        throw ParseError("line " + std::to_string(line) + ": " + (colon == std::string::npos ? msg : msg.substr(colon + 2)));
    }
}

json vec2_json(Vec2 p) { return json::array({p.x, p.y}); }

std::string indenter_text(const Indenter& ind) {
    return ind.shape == Indenter::Shape::circle ? "circle:" + fmt(ind.radius)
                                                : "rect:" + fmt(ind.width) + "x" + fmt(ind.height);
}

Indenter read_indenter(Reader& r, const std::string& key, const Indenter& fallback) {
    const json* v = r.get(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ParseError(r.key_path(key) + ": expected \"circle:R\" or \"rect:WxH\"");
    try {
        return parse_indenter(v->get<std::string>());
    } catch (const InvalidArgument& e) {
        throw ParseError(r.key_path(key) + ": " + e.what());
    }
}

// -----------------------------------------------------------------------------
// Design
// -----------------------------------------------------------------------------

const std::set<std::string>& design_keys() {
    static const std::set<std::string> keys{"name", "length", "base_width", "tip_offset", "front_strut_thickness",
                                            "back_strut_thickness", "rib_count", "rib_thickness", "rib_angle_deg",
                                            "gel_pad", "backing_thickness", "mirror_sheet_thickness", "variant_flags",
                                            "material_ids", "materials"};
    return keys;
}

// Reads the design fields of `r`; the caller decides whether other keys are allowed.
FinRayDesign read_design_fields(Reader& r) {
    FinRayDesign d;
    const json& name = r.require("name");
    if (!name.is_string() || name.get<std::string>().empty())
        throw ParseError(r.key_path("name") + ": expected a non-empty string");
    d.name = name.get<std::string>();
    r.number("length", d.length);
    r.number("base_width", d.base_width);
    r.number("tip_offset", d.tip_offset);
    r.number("front_strut_thickness", d.front_strut_thickness);
    r.number("back_strut_thickness", d.back_strut_thickness);
    r.integer("rib_count", d.rib_count);
    r.number("rib_thickness", d.rib_thickness);
    r.number("rib_angle_deg", d.rib_angle_deg);
    r.number("backing_thickness", d.backing_thickness);
    r.number("mirror_sheet_thickness", d.mirror_sheet_thickness);
    if (auto g = r.object("gel_pad")) {
        g->number("chord_length", d.gel_pad.chord_length);
        g->number("thickness", d.gel_pad.thickness);
        g->number("face_radius", d.gel_pad.face_radius);
        g->number("center_fraction", d.gel_pad.center_fraction);
        g->finish();
    }
    if (auto f = r.object("variant_flags")) {
        f->boolean("rigid_insert", d.variant_flags.rigid_insert);
        if (const json* patch = f->get("rigid_back_patch"); patch && !patch->is_null()) {
            Reader p(*patch, f->key_path("rigid_back_patch"));
            RigidBackPatch rb;
            const json& s = p.require("start");
            const json& e = p.require("end");
            if (!s.is_number() || !e.is_number()) throw ParseError(f->key_path("rigid_back_patch") + ": start/end must be numbers");
            rb.start = s.get<double>();
            rb.end = e.get<double>();
            p.finish();
            d.variant_flags.rigid_back_patch = rb;
        }
        f->finish();
    }
    if (const json* ids = r.get("material_ids")) {
        if (!ids->is_object()) throw ParseError(r.key_path("material_ids") + ": expected an object");
        const auto& regions = region_names();
        for (auto it = ids->begin(); it != ids->end(); ++it) {
            if (std::find(regions.begin(), regions.end(), it.key()) == regions.end())
                throw UnknownKey("unknown region '" + r.key_path("material_ids") + "." + it.key() + "'");
            if (!it->is_string()) throw ParseError(r.key_path("material_ids") + "." + it.key() + ": expected a string");
            d.material_ids[it.key()] = it->get<std::string>();
        }
    }
    if (const json* mats = r.get("materials")) {
        if (!mats->is_object()) throw ParseError(r.key_path("materials") + ": expected an object");
        for (auto it = mats->begin(); it != mats->end(); ++it) {
            Reader m(*it, r.key_path("materials") + "." + it.key());
            Material mat;
            mat.label = it.key();
            std::string model = to_string(mat.model);
            m.string("model", model);
            try {
                mat.model = material_model_from_string(model);
            } catch (const Error& e) {
                throw ParseError(m.key_path("model") + ": " + e.what());
            }
            m.number("youngs_modulus", mat.youngs_modulus);
            m.number("poisson_ratio", mat.poisson_ratio);
            m.number("plane_thickness", mat.plane_thickness);
            m.finish();
            d.materials[mat.label] = mat;
        }
    }
    return d;
}

json design_json(const FinRayDesign& d) {
    json j;
    j["name"] = d.name;
    j["length"] = d.length;
    j["base_width"] = d.base_width;
    j["tip_offset"] = d.tip_offset;
    j["front_strut_thickness"] = d.front_strut_thickness;
    j["back_strut_thickness"] = d.back_strut_thickness;
    j["rib_count"] = d.rib_count;
    j["rib_thickness"] = d.rib_thickness;
    j["rib_angle_deg"] = d.rib_angle_deg;
    j["gel_pad"] = {{"chord_length", d.gel_pad.chord_length},
                    {"thickness", d.gel_pad.thickness},
                    {"face_radius", d.gel_pad.face_radius},
                    {"center_fraction", d.gel_pad.center_fraction}};
    j["backing_thickness"] = d.backing_thickness;
    j["mirror_sheet_thickness"] = d.mirror_sheet_thickness;
    json flags{{"rigid_insert", d.variant_flags.rigid_insert}, {"rigid_back_patch", nullptr}};
    if (d.variant_flags.rigid_back_patch)
        flags["rigid_back_patch"] = {{"start", d.variant_flags.rigid_back_patch->start},
                                     {"end", d.variant_flags.rigid_back_patch->end}};
    j["variant_flags"] = flags;
    j["material_ids"] = d.material_ids;
    json mats = json::object();
    for (const auto& [label, m] : d.materials)
        mats[label] = {{"model", to_string(m.model)},
                       {"youngs_modulus", m.youngs_modulus},
                       {"poisson_ratio", m.poisson_ratio},
                       {"plane_thickness", m.plane_thickness}};
    j["materials"] = mats;
    return j;
}

FinRayDesign build_with_context(FinRayDesign draft, const std::string& where) {
    try {
        return build_design(std::move(draft));
    } catch (Error& e) {
        if (!where.empty()) e.add_context(where);
        throw;
    }
}

// -----------------------------------------------------------------------------
// Run config sections
// -----------------------------------------------------------------------------

void read_solver(Reader& r, SolveSettings& s) {
    r.integer("load_steps", s.load_steps);
    r.number("newton_tol_rel", s.newton_tol_rel);
    r.number("newton_tol_abs", s.newton_tol_abs);
    r.integer("max_newton_iters", s.max_newton_iters);
    r.integer("max_step_cuts", s.max_step_cuts);
    if (auto ls = r.object("line_search")) {
        ls->boolean("enabled", s.line_search.enabled);
        ls->number("factor", s.line_search.factor);
        ls->integer("max_cuts", s.line_search.max_cuts);
        ls->finish();
    }
    r.finish();
    try {
        s.validate();
    } catch (Error& e) {
        e.add_context("solver");
        throw;
    }
}

json solver_json(const SolveSettings& s) {
    return {{"load_steps", s.load_steps},
            {"newton_tol_rel", s.newton_tol_rel},
            {"newton_tol_abs", s.newton_tol_abs},
            {"max_newton_iters", s.max_newton_iters},
            {"max_step_cuts", s.max_step_cuts},
            {"line_search",
             {{"enabled", s.line_search.enabled}, {"factor", s.line_search.factor}, {"max_cuts", s.line_search.max_cuts}}}};
}

void read_protocol(Reader& r, ProtocolSettings& p) {
    r.number("max_depth", p.max_depth);
    r.integer("steps", p.steps);
    p.cylinder = read_indenter(r, "cylinder", p.cylinder);
    p.cuboid = read_indenter(r, "cuboid", p.cuboid);
    r.number("mesh_size", p.indentation.mesh_size);
    r.boolean("self_contact", p.indentation.self_contact);
    if (const json* d = r.get("compliance_depths")) {
        if (!d->is_array()) throw ParseError(r.key_path("compliance_depths") + ": expected a list of numbers");
        p.compliance_depths.clear();
        for (const auto& v : *d) {
            if (!v.is_number()) throw ParseError(r.key_path("compliance_depths") + ": expected a list of numbers");
            p.compliance_depths.push_back(v.get<double>());
        }
    }
    r.number("min_compliance_depth", p.min_compliance_depth);
    r.integer("threads", p.threads);
    r.finish();
    if (!(p.max_depth > 0.0)) throw ParseError(r.key_path("max_depth") + ": must be > 0");
    if (p.steps < 1) throw ParseError(r.key_path("steps") + ": must be >= 1");
    if (!(p.indentation.mesh_size > 0.0)) throw ParseError(r.key_path("mesh_size") + ": must be > 0");
    if (p.threads < 0) throw ParseError(r.key_path("threads") + ": must be >= 0");
}

json protocol_json(const ProtocolSettings& p) {
    return {{"max_depth", p.max_depth},
            {"steps", p.steps},
            {"cylinder", indenter_text(p.cylinder)},
            {"cuboid", indenter_text(p.cuboid)},
            {"mesh_size", p.indentation.mesh_size},
            {"self_contact", p.indentation.self_contact},
            {"compliance_depths", p.compliance_depths},
            {"min_compliance_depth", p.min_compliance_depth},
            {"threads", p.threads}};
}

void read_optics(Reader& r, OpticsSettings& o) {
    r.number("fov_deg", o.scene.fov_deg);
    r.number("window_margin", o.scene.window_margin);
    r.boolean("ribs_block", o.scene.ribs_block);
    r.number("mesh_size", o.scene.mesh_size);
    r.integer("rays", o.rays);
    r.finish();
    if (!(o.scene.fov_deg > 0.0 && o.scene.fov_deg < 180.0)) throw ParseError(r.key_path("fov_deg") + ": must be in (0, 180)");
    if (o.rays < 2) throw ParseError(r.key_path("rays") + ": must be >= 2");
    if (!(o.scene.mesh_size > 0.0)) throw ParseError(r.key_path("mesh_size") + ": must be > 0");
}

json optics_json(const OpticsSettings& o) {
    return {{"fov_deg", o.scene.fov_deg},
            {"window_margin", o.scene.window_margin},
            {"ribs_block", o.scene.ribs_block},
            {"mesh_size", o.scene.mesh_size},
            {"rays", o.rays}};
}

void read_imaging(Reader& r, ImagingSettings& s) {
    r.number("threshold", s.threshold);
    r.integer("min_blob_px", s.min_blob_px);
    r.integer("out_width", s.out_width);
    r.integer("out_height", s.out_height);
    r.finish();
    if (!(s.threshold > 0.0 && s.threshold < 1.0)) throw ParseError(r.key_path("threshold") + ": must be in (0, 1)");
    if (s.min_blob_px < 0) throw ParseError(r.key_path("min_blob_px") + ": must be >= 0");
    if (s.out_width < 1 || s.out_height < 1) throw ParseError(r.key_path("out_width") + ": output size must be >= 1");
}

json imaging_json(const ImagingSettings& s) {
    return {{"threshold", s.threshold},
            {"min_blob_px", s.min_blob_px},
            {"out_width", s.out_width},
            {"out_height", s.out_height}};
}

RunConfig read_run_config(const json& j, const std::filesystem::path& base_dir) {
    Reader r(j, "");
    RunConfig c;

    bool inline_design = false;
    for (auto it = j.begin(); it != j.end(); ++it)
        if (design_keys().count(it.key())) inline_design = true;
    if (inline_design) {
        if (r.has("designs")) throw ParseError("give either top-level design fields or a 'designs' list, not both");
        FinRayDesign d = read_design_fields(r);
        const std::string name = d.name;
        c.designs.push_back(build_with_context(std::move(d), name));
    }
    if (const json* list = r.get("designs")) {
        if (!list->is_array()) throw ParseError("designs: expected a list");
        for (std::size_t i = 0; i < list->size(); ++i) {
            const json& item = (*list)[i];
            const std::string path = "designs[" + std::to_string(i) + "]";
            if (item.is_string()) {
                const std::string ref = item.get<std::string>();
                const std::filesystem::path p = base_dir / ref;
                c.designs.push_back(ref == "baby" || ref == "original" ? load_design(ref) : load_design(p.string()));
            } else {
                Reader dr(item, path);
                FinRayDesign d = read_design_fields(dr);
                dr.finish();
                c.designs.push_back(build_with_context(std::move(d), path));
            }
        }
    }

    if (auto s = r.object("solver")) read_solver(*s, c.protocol.indentation.solve);
    if (auto p = r.object("protocol")) read_protocol(*p, c.protocol);
    if (auto o = r.object("optics")) read_optics(*o, c.optics);
    if (auto im = r.object("imaging")) read_imaging(*im, c.imaging);
    r.string("output_dir", c.output_dir);
    r.unsigned_integer("seed", c.seed);
    r.finish();
    return c;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    return read_run_config(parse_json(text), base_dir);
}

RunConfig parse_config(const std::filesystem::path& path) {
    try {
        return parse_config_text(read_text_file(path), path.parent_path().empty() ? "." : path.parent_path());
    } catch (Error& e) {
        e.add_context(path.string());
        throw;
    }
}

std::string emit_config(const RunConfig& c) {
    json j;
    json designs = json::array();
    for (const auto& d : c.designs) designs.push_back(design_json(d));
    j["designs"] = designs;
    j["solver"] = solver_json(c.protocol.indentation.solve);
    j["protocol"] = protocol_json(c.protocol);
    j["optics"] = optics_json(c.optics);
    j["imaging"] = imaging_json(c.imaging);
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

FinRayDesign parse_design_text(const std::string& text) {
    const json j = parse_json(text);
    Reader r(j, "");
    FinRayDesign d = read_design_fields(r);
    r.finish();
    return build_with_context(std::move(d), "");
}

std::string emit_design(const FinRayDesign& design) { return design_json(design).dump(2) + "\n"; }

FinRayDesign load_design(const std::string& path_or_preset) {
    if (path_or_preset == "baby") return baby_preset();
    if (path_or_preset == "original") return original_preset();
    try {
        return parse_design_text(read_text_file(path_or_preset));
    } catch (Error& e) {
        e.add_context(path_or_preset);
        throw;
    }
}

// -----------------------------------------------------------------------------
// Raytrace scenes
// -----------------------------------------------------------------------------

RaytraceConfig parse_raytrace_text(const std::string& text, const std::filesystem::path& base_dir) {
    const json j = parse_json(text);
    RaytraceConfig out;
    if (!j.is_object() || !j.contains("camera")) {
        const RunConfig rc = read_run_config(j, base_dir);
        if (rc.designs.empty()) throw MissingRequired("scene needs a 'camera' block or a design");
        out.scene = fin_ray_scene(rc.designs.front(), rc.optics.scene);
        out.rays = rc.optics.rays;
        return out;
    }
    Reader r(j, "");
    r.string("label", out.scene.label);
    Reader cam(r.require("camera"), "camera");
    out.scene.camera.position = Reader::to_vec2(cam.require("position"), "camera.position");
    out.scene.camera.boresight = normalized(Reader::to_vec2(cam.require("boresight"), "camera.boresight"));
    cam.number("fov_deg", out.scene.camera.fov_deg);
    cam.finish();
    out.scene.camera.validate();
    if (const json* m = r.get("mirror")) {
        Reader mr(*m, "mirror");
        out.scene.mirror.vertices = Reader::to_points(mr.require("vertices"), "mirror.vertices");
        mr.boolean("reflective_left", out.scene.mirror.reflective_left);
        mr.finish();
        out.scene.mirror.validate();
    }
    out.scene.sensing = Reader::to_points(r.require("sensing"), "sensing");
    if (out.scene.sensing.size() < 2) throw ParseError("sensing: needs at least two points");
    if (const json* occ = r.get("occluders")) {
        if (!occ->is_array()) throw ParseError("occluders: expected a list of polygons");
        for (std::size_t i = 0; i < occ->size(); ++i)
            out.scene.occluders.polygons.push_back(Reader::to_points((*occ)[i], "occluders[" + std::to_string(i) + "]"));
    }
    r.integer("rays", out.rays);
    r.finish();
    if (out.rays < 2) throw ParseError("rays: must be >= 2");
    return out;
}

RaytraceConfig parse_raytrace_config(const std::filesystem::path& path) {
    try {
        return parse_raytrace_text(read_text_file(path), path.parent_path().empty() ? "." : path.parent_path());
    } catch (Error& e) {
        e.add_context(path.string());
        throw;
    }
}

// -----------------------------------------------------------------------------
// Synthetic press files
// -----------------------------------------------------------------------------

namespace {

const std::set<std::string>& scene_keys() {
    static const std::set<std::string> keys{"name",   "shape",     "radius",      "rect_width", "rect_height",
                                            "frequency", "orientation_deg", "phase", "amplitude", "center",
                                            "depth",  "illumination", "shift",    "slope_gain", "noise_sigma",
                                            "seed"};
    return keys;
}

SynthCase read_case(Reader& r, std::uint64_t default_seed, const std::string& default_name) {
    SynthCase c;
    c.name = default_name;
    r.string("name", c.name);
    SyntheticScene& s = c.scene;
    std::string shape = to_string(s.shape);
    r.string("shape", shape);
    try {
        s.shape = synthetic_shape_from_string(shape);
    } catch (const Error& e) {
        throw ParseError(r.key_path("shape") + ": " + e.what());
    }
    r.number("radius", s.radius);
    r.number("rect_width", s.rect_width);
    r.number("rect_height", s.rect_height);
    r.number("frequency", s.frequency);
    r.number("orientation_deg", s.orientation_deg);
    r.number("phase", s.phase);
    r.number("amplitude", s.amplitude);
    r.vec2("center", s.center);
    r.number("depth", s.depth);
    if (auto il = r.object("illumination")) {
        for (const char* key : {"base", "gain"}) {
            if (const json* v = il->get(key)) {
                if (!v->is_array() || v->size() != 3) throw ParseError(il->key_path(key) + ": expected [r, g, b]");
                auto& dst = std::string(key) == "base" ? s.illumination.base : s.illumination.gain;
                for (std::size_t i = 0; i < 3; ++i) {
                    if (!(*v)[i].is_number()) throw ParseError(il->key_path(key) + ": expected [r, g, b]");
                    dst[i] = (*v)[i].get<double>();
                }
            }
        }
        il->finish();
    }
    r.number("shift", s.shift);
    r.number("slope_gain", s.slope_gain);
    r.number("noise_sigma", s.noise_sigma);
    s.seed = default_seed;
    r.unsigned_integer("seed", s.seed);
    try {
        s.validate();
    } catch (Error& e) {
        e.add_context(c.name);
        throw;
    }
    return c;
}

json case_json(const SynthCase& c) {
    const SyntheticScene& s = c.scene;
    return {{"name", c.name},
            {"shape", to_string(s.shape)},
            {"radius", s.radius},
            {"rect_width", s.rect_width},
            {"rect_height", s.rect_height},
            {"frequency", s.frequency},
            {"orientation_deg", s.orientation_deg},
            {"phase", s.phase},
            {"amplitude", s.amplitude},
            {"center", vec2_json(s.center)},
            {"depth", s.depth},
            {"illumination", {{"base", s.illumination.base}, {"gain", s.illumination.gain}}},
            {"shift", s.shift},
            {"slope_gain", s.slope_gain},
            {"noise_sigma", s.noise_sigma},
            {"seed", s.seed}};
}

}  // namespace

SynthConfig parse_synth_text(const std::string& text, std::uint64_t default_seed) {
    const json j = parse_json(text);
    Reader r(j, "");
    SynthConfig c;
    PipelineSettings& p = c.pipeline;
    r.integer("width", p.flat_width);
    r.integer("height", p.flat_height);
    r.number("mm_per_pixel", p.mm_per_pixel);
    r.number("threshold", p.threshold);
    r.integer("min_blob_px", p.min_blob_px);
    if (auto raw = r.object("raw")) {
        raw->integer("width", p.raw.width);
        raw->integer("height", p.raw.height);
        if (const json* q = raw->get("quad")) {
            const auto pts = Reader::to_points(*q, raw->key_path("quad"));
            if (pts.size() != 4) throw ParseError(raw->key_path("quad") + ": expected four corners");
            std::copy(pts.begin(), pts.end(), p.raw.quad.begin());
        }
        raw->number("noise_sigma", p.raw.noise_sigma);
        raw->finish();
    }
    if (p.flat_width < 1 || p.flat_height < 1 || p.raw.width < 1 || p.raw.height < 1)
        throw ParseError("image sizes must be >= 1");
    if (!(p.mm_per_pixel > 0.0)) throw ParseError("mm_per_pixel: must be > 0");
    if (!(p.threshold > 0.0 && p.threshold < 1.0)) throw ParseError("threshold: must be in (0, 1)");

    bool top_level_scene = false;
    for (auto it = j.begin(); it != j.end(); ++it)
        if (scene_keys().count(it.key())) top_level_scene = true;
    if (const json* cases = r.get("cases")) {
        if (top_level_scene) throw ParseError("give either top-level scene fields or a 'cases' list, not both");
        if (!cases->is_array() || cases->empty()) throw ParseError("cases: expected a non-empty list");
        for (std::size_t i = 0; i < cases->size(); ++i) {
            Reader cr((*cases)[i], "cases[" + std::to_string(i) + "]");
            c.cases.push_back(read_case(cr, default_seed, "case" + std::to_string(i)));
            cr.finish();
        }
    } else {
        c.cases.push_back(read_case(r, default_seed, "press"));
    }
    r.finish();

    std::set<std::string> names;
    for (const auto& sc : c.cases)
        if (!names.insert(sc.name).second) throw ParseError("duplicate case name '" + sc.name + "'");
    return c;
}

SynthConfig parse_synth_config(const std::filesystem::path& path, std::uint64_t default_seed) {
    try {
        return parse_synth_text(read_text_file(path), default_seed);
    } catch (Error& e) {
        e.add_context(path.string());
        throw;
    }
}

std::string emit_synth_config(const SynthConfig& c) {
    const PipelineSettings& p = c.pipeline;
    json quad = json::array();
    for (const auto& q : p.raw.quad) quad.push_back(vec2_json(q));
    json cases = json::array();
    for (const auto& sc : c.cases) cases.push_back(case_json(sc));
    json j{{"width", p.flat_width},
           {"height", p.flat_height},
           {"mm_per_pixel", p.mm_per_pixel},
           {"threshold", p.threshold},
           {"min_blob_px", p.min_blob_px},
           {"raw", {{"width", p.raw.width}, {"height", p.raw.height}, {"quad", quad}, {"noise_sigma", p.raw.noise_sigma}}},
           {"cases", cases}};
    return j.dump(2) + "\n";
}

}  // namespace finray
