#include "finray/design.hpp"

#include "finray/errors.hpp"
#include "layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace finray {

std::string to_string(MaterialModel m) {
    return m == MaterialModel::linear_elastic ? "linear_elastic" : "neo_hookean";
}

MaterialModel material_model_from_string(const std::string& s) {
    if (s == "linear_elastic") return MaterialModel::linear_elastic;
    if (s == "neo_hookean") return MaterialModel::neo_hookean;
    throw InvalidArgument("unknown material model '" + s + "'");
}

MaterialTable default_materials(MaterialModel model) {
    auto make = [model](const char* label, double e, double nu) {
        return Material{label, model, e, nu, 20.0};
    };
    return {
        {"tpu", make("tpu", 26.0, 0.48)},
        {"onyx", make("onyx", 1400.0, 0.35)},
        {"gel", make("gel", 0.15, 0.45)},
        {"pet", make("pet", 3000.0, 0.38)},
        {"acrylic", make("acrylic", 2000.0, 0.37)},
    };
}

void validate_material(const Material& m) {
    if (!(m.youngs_modulus > 0.0)) throw InvalidDesign("material '" + m.label + "': youngs_modulus must be > 0");
    if (!(m.poisson_ratio >= 0.0 && m.poisson_ratio < 0.5))
        throw InvalidDesign("material '" + m.label + "': poisson_ratio must lie in [0, 0.5)");
    if (!(m.plane_thickness > 0.0)) throw InvalidDesign("material '" + m.label + "': plane_thickness must be > 0");
}

MaterialTable scale_moduli(MaterialTable table, double factor) {
    for (auto& [_, m] : table) m.youngs_modulus *= factor;
    return table;
}

MaterialTable with_model(MaterialTable table, MaterialModel model) {
    for (auto& [_, m] : table) m.model = model;
    return table;
}

double GelPadSpec::sagitta() const {
    const double half = 0.5 * chord_length;
    return face_radius - std::sqrt(face_radius * face_radius - half * half);
}

const std::vector<std::string>& region_names() {
    static const std::vector<std::string> names = {
        region::front_strut, region::back_strut, region::ribs,   region::tip,          region::backing,
        region::mirror_sheet, region::gel_pad,   region::insert, region::camera_patch,
    };
    return names;
}

namespace {

const std::map<std::string, std::string>& default_material_ids() {
    static const std::map<std::string, std::string> ids = {
        {region::front_strut, "tpu"}, {region::back_strut, "tpu"},   {region::ribs, "tpu"},
        {region::tip, "tpu"},         {region::backing, "onyx"},     {region::mirror_sheet, "pet"},
        {region::gel_pad, "gel"},     {region::insert, "acrylic"},   {region::camera_patch, "acrylic"},
    };
    return ids;
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidDesign(std::string(what) + " must be > 0");
}

}  // namespace

Vec2 StrutFrame::front_at(double y, double offset) const {
    const Vec2 d = front_top - front_base;
    const Vec2 base = front_base + front_inward * offset;
    return {base.x + d.x * ((y - base.y) / d.y), y};
}

Vec2 StrutFrame::back_at(double y, double offset) const {
    const Vec2 d = back_top - back_base;
    const Vec2 base = back_base + back_inward * offset;
    return {base.x + d.x * ((y - base.y) / d.y), y};
}

StrutFrame strut_frame(const FinRayDesign& design) {
    const double tip_width = design.front_strut_thickness + design.back_total_thickness();
    const double apex = 0.5 * design.base_width - design.tip_offset;
    StrutFrame f;
    f.front_base = {0.0, 0.0};
    f.front_top = {apex - 0.5 * tip_width, design.length};
    f.back_base = {design.base_width, 0.0};
    f.back_top = {apex + 0.5 * tip_width, design.length};
    const Vec2 df = normalized(f.front_top - f.front_base);
    const Vec2 db = normalized(f.back_top - f.back_base);
    f.front_inward = {df.y, -df.x};
    f.back_inward = {-db.y, db.x};
    return f;
}

FinRayDesign build_design(FinRayDesign d) {
    require_positive(d.length, "length");
    require_positive(d.base_width, "base_width");
    require_positive(d.front_strut_thickness, "front_strut_thickness");
    require_positive(d.back_strut_thickness, "back_strut_thickness");
    require_positive(d.rib_thickness, "rib_thickness");
    require_positive(d.backing_thickness, "backing_thickness");
    require_positive(d.mirror_sheet_thickness, "mirror_sheet_thickness");
    require_positive(d.gel_pad.chord_length, "gel_pad.chord_length");
    require_positive(d.gel_pad.thickness, "gel_pad.thickness");
    require_positive(d.gel_pad.face_radius, "gel_pad.face_radius");
    if (d.rib_count < 1) throw InvalidDesign("rib_count must be >= 1");
    if (!(d.tip_offset >= 0.0 && d.tip_offset < 0.5 * d.base_width))
        throw InvalidDesign("tip_offset must lie in [0, base_width / 2)");
    if (!(std::abs(d.rib_angle_deg) < 60.0)) throw InvalidDesign("rib_angle_deg must lie in (-60, 60)");
    if (d.gel_pad.face_radius <= 0.5 * d.gel_pad.chord_length)
        throw InvalidDesign("gel_pad.face_radius must exceed half the chord length");
    if (d.gel_pad.sagitta() > d.gel_pad.thickness)
        throw InvalidDesign("gel pad arc sagitta exceeds the pad thickness");
    if (!(d.gel_pad.center_fraction > 0.0 && d.gel_pad.center_fraction < 1.0))
        throw InvalidDesign("gel_pad.center_fraction must lie in (0, 1)");

    const StrutFrame f = strut_frame(d);
    const double tf = d.front_strut_thickness;
    const double tb = d.back_total_thickness();
    d.cavity_top = d.length * (1.0 - kTipFraction);
    auto gap = [&](double y) { return f.back_at(y, tb).x - f.front_at(y, tf).x; };
    if (!(gap(0.0) > 0.0) || !(gap(d.cavity_top) > 0.0))
        throw InvalidDesign("struts overlap below the tip; widen the base or thin the struts");

    // Ribs, evenly spaced along the strut span.
    const double angle = d.rib_angle_deg * std::numbers::pi / 180.0;
    const double half_band = 0.5 * d.rib_thickness / std::cos(angle);
    d.ribs.clear();
    for (int i = 0; i < d.rib_count; ++i) {
        const double yc = d.cavity_top * (i + 1) / (d.rib_count + 1);
        const double yb = yc + std::tan(angle) * gap(yc);
        RibPlacement r{yc - half_band, yc + half_band, yb - half_band, yb + half_band};
        if (!(r.front_lo > 0.0 && r.back_lo > 0.0 && r.front_hi < d.cavity_top && r.back_hi < d.cavity_top))
            throw InvalidDesign("rib " + std::to_string(i) + " is not strictly inside the strut span");
        if (!d.ribs.empty()) {
            const RibPlacement& prev = d.ribs.back();
            if (!(r.front_lo > prev.front_hi && r.back_lo > prev.back_hi))
                throw InvalidDesign("ribs " + std::to_string(i - 1) + " and " + std::to_string(i) + " overlap");
        }
        d.ribs.push_back(r);
    }

    // Gel pad sits on the front face and stays below the solid tip.
    const double face_len = norm(f.front_top - f.front_base);
    const double s_mid = d.gel_pad.center_fraction * face_len;
    const double s_lo = s_mid - 0.5 * d.gel_pad.chord_length;
    const double s_hi = s_mid + 0.5 * d.gel_pad.chord_length;
    const Vec2 dir = (f.front_top - f.front_base) / face_len;
    if (!(s_lo > 0.0)) throw InvalidDesign("gel pad extends below the base");
    if (!((f.front_base + dir * s_hi).y < d.cavity_top)) throw InvalidDesign("gel pad extends past the tip");

    if (const auto& patch = d.variant_flags.rigid_back_patch) {
        if (!(patch->start >= 0.0 && patch->end > patch->start && patch->end <= d.cavity_top))
            throw InvalidDesign("rigid_back_patch must satisfy 0 <= start < end <= cavity top");
    }

    for (const auto& [reg, label] : d.material_ids) {
        const auto& names = region_names();
        if (std::find(names.begin(), names.end(), reg) == names.end())
            throw InvalidDesign("unknown region '" + reg + "' in material_ids");
    }
    for (const auto& [reg, label] : default_material_ids()) d.material_ids.try_emplace(reg, label);
    const MaterialTable defaults = default_materials();
    for (const auto& [reg, label] : d.material_ids) {
        if (d.materials.count(label)) continue;
        auto it = defaults.find(label);
        if (it == defaults.end()) throw InvalidDesign("region '" + reg + "' uses undefined material '" + label + "'");
        d.materials.emplace(label, it->second);
    }
    for (const auto& [label, m] : d.materials) validate_material(m);
    return d;
}

FinRayDesign baby_preset() {
    FinRayDesign d;
    d.name = "baby";
    return build_design(d);
}

FinRayDesign original_preset() {
    FinRayDesign d;
    d.name = "original";
    d.variant_flags.rigid_insert = true;
    d.variant_flags.rigid_back_patch = RigidBackPatch{12.0, 36.0};
    return build_design(d);
}

double Outline::area() const {
    double a = 0.0;
    for (const auto& p : polygons) {
        const double v = std::abs(signed_area(p.vertices));
        a += p.hole ? -v : v;
    }
    return a;
}

const LabeledPolygon& Outline::find(const std::string& label) const {
    for (const auto& p : polygons)
        if (p.label == label) return p;
    throw InvalidArgument("outline has no polygon '" + label + "'");
}

Outline outline(const FinRayDesign& design, double max_edge) {
    using detail::join;
    using detail::reversed;
    const detail::Layout lay = detail::build_layout(design, max_edge);
    Outline out;

    // Counter-clockwise: up the back, across the tip, down the front, then the
    // base with its notch into the lowest cavity cell.
    const Polyline cap_top_rev = reversed(lay.cap_top);
    const Polyline cap_front_rev = reversed(lay.cap_front);
    const Polyline front_outer_rev = reversed(lay.front_outer);
    const Polyline back_inner_low = reversed(lay.cell_back.front());
    Polyline frame = join({&lay.back_outer, &lay.cap_back, &cap_top_rev, &cap_front_rev, &front_outer_rev,
                           &lay.front_base, &lay.cell_front.front(), &lay.rib_bottom.front(), &back_inner_low,
                           &lay.back_base});
    frame.pop_back();  // closing vertex repeats the first
    out.polygons.push_back({"frame", std::move(frame), false});

    const std::size_t n = lay.rib_top.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Polyline& roof = (k + 1 < n) ? lay.rib_bottom[k + 1] : lay.cap_cavity;
        const Polyline back_down = reversed(lay.cell_back[k + 1]);
        const Polyline floor_rev = reversed(lay.rib_top[k]);
        Polyline cell = join({&lay.cell_front[k + 1], &roof, &back_down, &floor_rev});
        cell.pop_back();
        out.polygons.push_back({"cavity_" + std::to_string(k), std::move(cell), true});
    }

    const Polyline arc_rev = reversed(lay.gel_face);
    const Polyline lower_rev = reversed(lay.pad_lower_end);
    Polyline pad = join({&lay.pad_chord, &lay.pad_upper_end, &arc_rev, &lower_rev});
    pad.pop_back();
    out.polygons.push_back({"gel_pad", std::move(pad), false});
    return out;
}

SurfacePoint front_surface_point(const FinRayDesign& design, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("surface fraction must lie in [0, 1]");
    const StrutFrame f = strut_frame(design);
    const double y = fraction * design.length;
    const Vec2 on_line = f.front_at(y, 0.0);
    const Vec2 outward = -f.front_inward;

    const double face_len = norm(f.front_top - f.front_base);
    const Vec2 dir = (f.front_top - f.front_base) / face_len;
    const Vec2 mid = f.front_base + dir * (design.gel_pad.center_fraction * face_len);
    const double u = dot(on_line - mid, dir);
    const double half = 0.5 * design.gel_pad.chord_length;
    if (std::abs(u) > half) return {on_line, outward, false};

    const double r = design.gel_pad.face_radius;
    const double h = design.gel_pad.thickness - r + std::sqrt(r * r - u * u);
    const Vec2 center = mid + outward * (design.gel_pad.thickness - r);
    const Vec2 p = on_line + outward * h;
    return {p, normalized(p - center), true};
}

}  // namespace finray
