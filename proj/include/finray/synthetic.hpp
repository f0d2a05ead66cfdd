#pragma once

#include "finray/image.hpp"
#include "finray/imaging.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace finray {

/// Three linear colour ramps: red grows with x, green with y, blue toward the
/// top-left corner.
struct Illumination {
    std::array<double, 3> base{50.0, 50.0, 50.0};
    std::array<double, 3> gain{110.0, 110.0, 110.0};
};

struct SyntheticScene {
    enum class Shape { circle, rectangle, textured };

    Shape shape = Shape::circle;
    double radius = 2.375;       ///< mm; ball radius, or patch radius when textured
    double rect_width = 5.0;     ///< mm along x
    double rect_height = 10.0;   ///< mm along y
    double frequency = 1.0;      ///< textured: cycles per mm
    double orientation_deg = 0.0;
    double phase = 0.0;          ///< textured: radians
    double amplitude = 0.5;      ///< textured relief height, mm
    Vec2 center{12.0, 6.75};     ///< mm, image origin at pixel (0, 0)
    double depth = 1.0;          ///< mm
    Illumination illumination;
    double shift = 60.0;         ///< brightness added over the footprint
    double slope_gain = 25.0;    ///< extra shading proportional to the surface slope
    double noise_sigma = 2.0;    ///< fixed-pattern noise shared by both frames
    std::uint64_t seed = 42;

    void validate() const;
};

std::string to_string(SyntheticScene::Shape s);
SyntheticScene::Shape synthetic_shape_from_string(const std::string& s);

struct SyntheticRender {
    RasterImage reference;
    RasterImage pressed;
    ContactMask truth_mask;
    Vec2 truth_center_px;
};

/// Flat (already unwarped) sensor view of `scene`.
SyntheticRender render_synthetic(const SyntheticScene& scene, int width = 240, int height = 135,
                                 double mm_per_pixel = 0.1);

/// Smooth checkerboard (square side `square_px`) of a flat_w x flat_h image,
/// seen through `flat_to_view` in a view_w x view_h frame. The pattern is
/// evaluated analytically at each view pixel; pixels outside the board are black.
RasterImage checkerboard_view(int flat_w, int flat_h, double square_px, const Homography& flat_to_view,
                              int view_w, int view_h);
/// Same board seen head-on.
RasterImage checkerboard(int width, int height, double square_px);

/// Footprint radius of a sphere of radius r pressed to depth d (r once d >= r).
double sphere_footprint_radius(double r, double d);

// -----------------------------------------------------------------------------
// Camera view and the end-to-end check
// -----------------------------------------------------------------------------

struct RawViewSettings {
    int width = 320;
    int height = 240;
    Quad quad{Vec2{40, 30}, Vec2{290, 45}, Vec2{300, 205}, Vec2{25, 215}};
    double noise_sigma = 1.5;  ///< independent per frame
};

/// Places the flat image inside `settings.quad` of a raw camera frame.
RasterImage raw_view(const RasterImage& flat, const RawViewSettings& settings, std::uint64_t noise_seed);

struct PressEvaluation {
    MetricRow metrics;
    ContactMask mask;
    SyntheticRender render;
    RasterImage raw_reference;
    RasterImage raw_pressed;
};

struct PipelineSettings {
    int flat_width = 240;
    int flat_height = 135;
    double mm_per_pixel = 0.1;
    RawViewSettings raw;
    double threshold = 0.25;
    int min_blob_px = 20;
};

/// Render, view through the camera, unwarp, difference and localize. Centre
/// error is filled for circles, Dice for every shape.
PressEvaluation evaluate_press(const std::string& name, const SyntheticScene& scene,
                               const PipelineSettings& settings = {});

}  // namespace finray
