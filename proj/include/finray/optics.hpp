#pragma once

#include "finray/design.hpp"
#include "finray/geometry.hpp"
#include "finray/mesh.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace finray {

struct Ray2 {
    Vec2 origin;
    Vec2 dir;  ///< unit
};

struct Camera2D {
    Vec2 position;
    Vec2 boresight{1.0, 0.0};  ///< unit
    double fov_deg = 100.0;

    void validate() const;
};

/// Reflective on the left of each segment a -> b when `reflective_left`,
/// otherwise on the right.
struct MirrorPolyline {
    Polyline vertices;
    bool reflective_left = true;

    void validate() const;
    std::size_t segment_count() const { return vertices.size() < 2 ? 0 : vertices.size() - 1; }
};

struct SceneOccluders {
    std::vector<Polygon> polygons;
};

/// Reflected ray leaving the hit point of `ray` on segment [a, b], or nullopt
/// on a miss. Either side of the segment reflects.
std::optional<Ray2> reflect(const Ray2& ray, Vec2 a, Vec2 b);

/// Mirror image of the camera across the infinite line through a and b.
/// Throws DegenerateMirror when a == b.
Camera2D virtual_camera(const Camera2D& camera, Vec2 a, Vec2 b);

struct SampleTrace {
    Vec2 point;
    double arclength = 0.0;
    bool hit = false;
    int segment = -1;      ///< mirror segment used, -1 if none (or direct view)
    Vec2 mirror_point;     ///< bounce point when hit through the mirror
    double angle_deg = 0.0;  ///< off-boresight angle of the chosen path
};

struct CoverageResult {
    double fraction = 0.0;
    std::vector<bool> hit_map;
    std::vector<SampleTrace> samples;
};

/// One-bounce coverage of the sensing polyline, `ray_count` samples spaced
/// uniformly by arc length; ends carry half weight.
CoverageResult coverage(const Camera2D& camera, const MirrorPolyline& mirror, const Polyline& sensing,
                        const SceneOccluders& occluders, int ray_count);
/// Same result computed by direct rays from the virtual camera of a
/// single-segment mirror; occlusion is still tested on the real path.
CoverageResult coverage_virtual(const Camera2D& camera, const MirrorPolyline& mirror, const Polyline& sensing,
                                const SceneOccluders& occluders, int ray_count);
/// Direct view without a mirror.
CoverageResult coverage_direct(const Camera2D& camera, const Polyline& sensing, const SceneOccluders& occluders,
                               int ray_count);

/// Smallest full fov (degrees) giving coverage 1.0 for the camera pose.
/// Samples with no unblocked path within 179.9 degrees raise Unreachable.
double min_fov(const Camera2D& camera, const MirrorPolyline& mirror, const Polyline& sensing,
               const SceneOccluders& occluders, int ray_count = 721);
double min_fov_direct(const Camera2D& camera, const Polyline& sensing, const SceneOccluders& occluders,
                      int ray_count = 721);

// -----------------------------------------------------------------------------
// Fin Ray scene
// -----------------------------------------------------------------------------

struct OpticalScene {
    std::string label;
    Camera2D camera;
    MirrorPolyline mirror;
    Polyline sensing;
    SceneOccluders occluders;
    std::vector<Polyline> context;  ///< mesh boundary edges, drawn only
    bool deformed = false;
};

struct SceneOptions {
    double fov_deg = 100.0;
    /// Opening in the front strut around the pad, extending the pad chord at each end (mm).
    double window_margin = 3.0;
    bool ribs_block = false;  ///< ribs are hollowed at the optical mid-plane by default
    double mesh_size = 1.0;
};

/// Camera at the base between the struts, aimed at the mirror midpoint; mirror
/// on the back face, sensing along the gel arc.
OpticalScene fin_ray_scene(const FinRayDesign& design, const SceneOptions& options = {});
/// Same construction on a mesh with nodal displacements applied (mirror,
/// sensing and occluders move; the camera stays at the base).
OpticalScene fin_ray_scene(const FinRayDesign& design, const Mesh2D& mesh, const std::vector<Vec2>& displacements,
                           const SceneOptions& options = {});

/// Ray diagram: outline, mirror, sensing arc, camera fov edges, virtual camera
/// and up to `max_drawn` traced sample paths.
std::string ray_diagram_svg(const OpticalScene& scene, const CoverageResult& result, int max_drawn = 60);
/// CSV with header `sample,s_mm,x,y,hit,segment,mirror_x,mirror_y,angle_deg`.
void write_coverage_csv(std::ostream& os, const CoverageResult& result);

}  // namespace finray
