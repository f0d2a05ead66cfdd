#include "finray/synthetic.hpp"

#include "finray/errors.hpp"
#include "finray/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace finray {

void SyntheticScene::validate() const {
    if (!(depth >= 0.0) || !std::isfinite(depth)) throw InvalidArgument("synthetic depth must be >= 0");
    if (!(radius > 0.0)) throw InvalidArgument("synthetic radius must be > 0");
    if (shape == Shape::rectangle && !(rect_width > 0.0 && rect_height > 0.0))
        throw InvalidArgument("synthetic rectangle sides must be > 0");
    if (shape == Shape::textured && !(frequency > 0.0 && amplitude > 0.0))
        throw InvalidArgument("texture frequency and amplitude must be > 0");
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
}

std::string to_string(SyntheticScene::Shape s) {
    switch (s) {
        case SyntheticScene::Shape::circle: return "circle";
        case SyntheticScene::Shape::rectangle: return "rectangle";
        case SyntheticScene::Shape::textured: return "textured";
    }
    return "circle";
}

SyntheticScene::Shape synthetic_shape_from_string(const std::string& s) {
    if (s == "circle" || s == "ball") return SyntheticScene::Shape::circle;
    if (s == "rectangle" || s == "rect") return SyntheticScene::Shape::rectangle;
    if (s == "textured" || s == "texture") return SyntheticScene::Shape::textured;
    throw InvalidArgument("unknown synthetic shape '" + s + "'");
}

double sphere_footprint_radius(double r, double d) {
    if (d <= 0.0) return 0.0;
    if (d >= r) return r;
    return std::sqrt(r * r - (r - d) * (r - d));
}

namespace {

// Contact test and surface slope (dz/dx, dz/dy, dimensionless, |slope| < 1)
// at a point relative to the press centre, in mm.
struct Contact {
    bool inside = false;
    Vec2 slope;
};

Contact contact_at(const SyntheticScene& s, Vec2 q) {
    if (s.depth <= 0.0) return {};
    switch (s.shape) {
        case SyntheticScene::Shape::circle: {
            const double a = sphere_footprint_radius(s.radius, s.depth);
            if (dot(q, q) > a * a) return {};
            return {true, q / s.radius};
        }
        case SyntheticScene::Shape::rectangle: {
            if (std::abs(q.x) > 0.5 * s.rect_width || std::abs(q.y) > 0.5 * s.rect_height) return {};
            return {true, {}};
        }
        case SyntheticScene::Shape::textured: {
            if (dot(q, q) > s.radius * s.radius) return {};
            const double th = s.orientation_deg * std::numbers::pi / 180.0;
            const double u = std::cos(th) * q.x + std::sin(th) * q.y;
            const double v = -std::sin(th) * q.x + std::cos(th) * q.y;
            const double k = 2.0 * std::numbers::pi * s.frequency;
            const double su = std::sin(k * u + s.phase), sv = std::sin(k * v);
            // Relief z = A (1 + su sv) / 2; the surface touches where z >= A - depth.
            const double z = 0.5 * s.amplitude * (1.0 + su * sv);
            if (z < s.amplitude - s.depth) return {};
            const double du = 0.5 * s.amplitude * k * std::cos(k * u + s.phase) * sv;
            const double dv = 0.5 * s.amplitude * k * su * std::cos(k * v);
            Vec2 g{std::cos(th) * du - std::sin(th) * dv, std::sin(th) * du + std::cos(th) * dv};
            const double n = norm(g);
            if (n > 0.0) g = g * (std::tanh(n) / n);
            return {true, g};
        }
    }
    return {};
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

SyntheticRender render_synthetic(const SyntheticScene& scene, int width, int height, double mm_per_pixel) {
    scene.validate();
    if (width <= 0 || height <= 0) throw InvalidArgument("render size must be > 0");
    if (!(mm_per_pixel > 0.0)) throw InvalidArgument("mm_per_pixel must be > 0");

    SyntheticRender out;
    out.reference = RasterImage(width, height);
    out.reference.mm_per_pixel = mm_per_pixel;
    out.truth_mask = ContactMask(width, height);
    out.truth_center_px = scene.center / mm_per_pixel;

    Rng rng(scene.seed);
    std::vector<double> ref(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    const auto& il = scene.illumination;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double u = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
            const double v = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
            const std::array<double, 3> ramp{u, v, (1.0 - u) * (1.0 - v)};
            for (int c = 0; c < 3; ++c) {
                const std::size_t i = out.reference.index(x, y, c);
                ref[i] = il.base[static_cast<std::size_t>(c)] + il.gain[static_cast<std::size_t>(c)] * ramp[static_cast<std::size_t>(c)] +
                         scene.noise_sigma * rng.normal();
                out.reference.data[i] = to_byte(ref[i]);
            }
        }

    // Each channel responds to the slope along its own light direction.
    static const std::array<Vec2, 3> light{Vec2{1.0, 0.0}, Vec2{-0.5, 0.8660254037844386},
                                           Vec2{-0.5, -0.8660254037844386}};
    out.pressed = out.reference;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const Vec2 q = Vec2{x * mm_per_pixel, y * mm_per_pixel} - scene.center;
            const Contact c = contact_at(scene, q);
            if (!c.inside) continue;
            out.truth_mask.set(x, y);
            for (int ch = 0; ch < 3; ++ch) {
                const std::size_t i = out.pressed.index(x, y, ch);
                out.pressed.data[i] =
                    to_byte(ref[i] + scene.shift + scene.slope_gain * dot(c.slope, light[static_cast<std::size_t>(ch)]));
            }
        }
    return out;
}

RasterImage checkerboard_view(int flat_w, int flat_h, double square_px, const Homography& flat_to_view,
                              int view_w, int view_h) {
    if (flat_w <= 0 || flat_h <= 0 || view_w <= 0 || view_h <= 0) throw InvalidArgument("image size must be > 0");
    if (!(square_px > 0.0)) throw InvalidArgument("square size must be > 0");
    const Homography back = flat_to_view.inverse();
    const double k = std::numbers::pi / square_px;
    RasterImage out(view_w, view_h);
    for (int y = 0; y < view_h; ++y)
        for (int x = 0; x < view_w; ++x) {
            const Vec2 p = back.apply({static_cast<double>(x), static_cast<double>(y)});
            if (!(p.x >= -1e-9 && p.y >= -1e-9 && p.x <= flat_w - 1 + 1e-9 && p.y <= flat_h - 1 + 1e-9)) continue;
            const double v = 128.0 + 100.0 * std::tanh(3.0 * std::sin(k * (p.x + 0.5)) * std::sin(k * (p.y + 0.5)));
            const std::array<double, 3> rgb{v, 0.5 * v + 40.0, 255.0 - v};
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_byte(rgb[static_cast<std::size_t>(c)]);
        }
    return out;
}

RasterImage checkerboard(int width, int height, double square_px) {
    return checkerboard_view(width, height, square_px, Homography{}, width, height);
}

RasterImage raw_view(const RasterImage& flat, const RawViewSettings& settings, std::uint64_t noise_seed) {
    const double w = flat.width - 1, h = flat.height - 1;
    const Homography to_raw = estimate_homography({Vec2{0, 0}, Vec2{w, 0}, Vec2{w, h}, Vec2{0, h}}, settings.quad);
    RasterImage raw = warp_perspective(flat, to_raw, settings.width, settings.height);
    if (settings.noise_sigma > 0.0) {
        Rng rng(noise_seed);
        for (auto& v : raw.data) v = to_byte(v + settings.noise_sigma * rng.normal());
    }
    return raw;
}

PressEvaluation evaluate_press(const std::string& name, const SyntheticScene& scene, const PipelineSettings& s) {
    PressEvaluation ev;
    ev.render = render_synthetic(scene, s.flat_width, s.flat_height, s.mm_per_pixel);
    ev.raw_reference = raw_view(ev.render.reference, s.raw, scene.seed ^ 0x5eedULL);
    ev.raw_pressed = raw_view(ev.render.pressed, s.raw, scene.seed ^ 0xfeedULL);
    const RasterImage ref = unwarp(ev.raw_reference, s.raw.quad, s.flat_width, s.flat_height);
    const RasterImage img = unwarp(ev.raw_pressed, s.raw.quad, s.flat_width, s.flat_height);
    ev.mask = localize(difference(img, ref), s.threshold, s.min_blob_px);

    ev.metrics.name = name;
    ev.metrics.center_error_px = std::numeric_limits<double>::quiet_NaN();
    ev.metrics.dice = dice(ev.mask, ev.render.truth_mask);
    if (scene.shape == SyntheticScene::Shape::circle)
        ev.metrics.center_error_px = ev.mask.empty() ? std::numeric_limits<double>::infinity()
                                                     : center_error(ev.mask, ev.render.truth_center_px);
    return ev;
}

}  // namespace finray
