#pragma once

#include "finray/geometry.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finray {

// =============================================================================
// Materials
// =============================================================================

enum class MaterialModel { linear_elastic, neo_hookean };

std::string to_string(MaterialModel m);
MaterialModel material_model_from_string(const std::string& s);

struct Material {
    std::string label;
    MaterialModel model = MaterialModel::neo_hookean;
    double youngs_modulus = 1.0;  ///< MPa
    double poisson_ratio = 0.3;
    double plane_thickness = 20.0;  ///< out-of-plane depth, mm

    double shear_modulus() const { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }
    /// Plane-stress effective first Lame parameter, E nu / (1 - nu^2).
    double plane_stress_lambda() const {
        return youngs_modulus * poisson_ratio / (1.0 - poisson_ratio * poisson_ratio);
    }
};

using MaterialTable = std::map<std::string, Material>;

/// Handbook defaults: TPU struts, Onyx backing, silicone gel, PET sheet, acrylic.
MaterialTable default_materials(MaterialModel model = MaterialModel::neo_hookean);
void validate_material(const Material& m);
/// Same table with every modulus multiplied by `factor`.
MaterialTable scale_moduli(MaterialTable table, double factor);
MaterialTable with_model(MaterialTable table, MaterialModel model);

// =============================================================================
// Fin Ray design
// =============================================================================

struct GelPadSpec {
    double chord_length = 18.0;
    double thickness = 2.5;
    double face_radius = 25.0;
    /// Pad centre as a fraction of the front face length, measured from the base.
    double center_fraction = 0.45;

    double sagitta() const;
};

struct RigidBackPatch {
    double start = 0.0;  ///< height above the base, mm
    double end = 0.0;
    bool operator==(const RigidBackPatch&) const = default;
};

struct VariantFlags {
    bool rigid_insert = false;
    std::optional<RigidBackPatch> rigid_back_patch;
};

/// Rib attachment heights on the inner strut faces (derived by build_design).
struct RibPlacement {
    double front_lo = 0.0, front_hi = 0.0;
    double back_lo = 0.0, back_hi = 0.0;
};

/// Region names used for material assignment.
namespace region {
inline constexpr const char* front_strut = "front_strut";
inline constexpr const char* back_strut = "back_strut";
inline constexpr const char* ribs = "ribs";
inline constexpr const char* tip = "tip";
inline constexpr const char* backing = "backing";
inline constexpr const char* mirror_sheet = "mirror_sheet";
inline constexpr const char* gel_pad = "gel_pad";
inline constexpr const char* insert = "insert";
inline constexpr const char* camera_patch = "camera_patch";
}  // namespace region

const std::vector<std::string>& region_names();

struct FinRayDesign {
    std::string name = "design";
    double length = 55.0;
    double base_width = 22.0;
    double tip_offset = 8.0;
    double front_strut_thickness = 1.5;
    double back_strut_thickness = 1.5;
    int rib_count = 4;
    double rib_thickness = 1.2;
    double rib_angle_deg = 10.0;  ///< rise of each rib from front to back
    GelPadSpec gel_pad;
    double backing_thickness = 0.5;
    double mirror_sheet_thickness = 0.2;
    VariantFlags variant_flags;
    std::map<std::string, std::string> material_ids;  ///< region -> material label
    MaterialTable materials;

    // Derived by build_design.
    std::vector<RibPlacement> ribs;
    double cavity_top = 0.0;  ///< height where the solid tip begins

    double back_total_thickness() const {
        return backing_thickness + back_strut_thickness + mirror_sheet_thickness;
    }
};

/// Validates a draft, fills region/material defaults and derives rib placement.
/// Throws InvalidDesign.
FinRayDesign build_design(FinRayDesign draft);

FinRayDesign baby_preset();
/// Baby geometry plus the acrylic insert under the gel and the camera on the backbone.
FinRayDesign original_preset();

/// Fraction of the finger length occupied by the solid tip.
inline constexpr double kTipFraction = 0.12;
/// Fraction of local pad thickness taken by the insert layer (when present).
inline constexpr double kInsertFraction = 0.4;

// =============================================================================
// Outline
// =============================================================================

struct LabeledPolygon {
    std::string label;
    Polygon vertices;
    bool hole = false;
};

struct Outline {
    std::vector<LabeledPolygon> polygons;

    /// Material area: outer regions minus holes.
    double area() const;
    const LabeledPolygon& find(const std::string& label) const;
};

/// Frame boundary (with the open base notch), cavity holes between ribs and
/// the gel pad. The arc of the pad is sampled at the resolution the mesher
/// would use for `max_edge`, so mesh and outline areas agree exactly.
Outline outline(const FinRayDesign& design, double max_edge = 0.5);

/// Straight outer lines of the two struts, from base to tip.
struct StrutFrame {
    Vec2 front_base, front_top;
    Vec2 back_base, back_top;
    Vec2 front_inward, back_inward;  ///< unit normals into the finger

    Vec2 front_at(double y, double offset) const;
    Vec2 back_at(double y, double offset) const;
};

StrutFrame strut_frame(const FinRayDesign& design);

/// Probe point on the exterior front surface at `fraction` of the length,
/// together with the outward unit normal there.
struct SurfacePoint {
    Vec2 point;
    Vec2 outward;
    bool on_gel = false;
};

SurfacePoint front_surface_point(const FinRayDesign& design, double fraction);

}  // namespace finray
