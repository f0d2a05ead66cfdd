#include "finray/imaging.hpp"

#include "finray/errors.hpp"
#include "finray/report.hpp"
#include "finray/rng.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace finray {

Vec2 Homography::apply(Vec2 p) const {
    const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
    const double inf = std::numeric_limits<double>::infinity();
    if (w == 0.0) return {inf, inf};
    return {(m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2)) / w, (m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2)) / w};
}

Homography Homography::inverse() const {
    if (m.determinant() == 0.0) throw DegenerateCorrespondence("singular homography");
    Homography h{m.inverse()};
    if (h.m(2, 2) != 0.0) h.m /= h.m(2, 2);
    return h;
}

namespace {

double triangle_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * std::abs(cross(b - a, c - a)); }

void check_general_position(const Quad& q, const char* which) {
    double scale = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) scale = std::max(scale, norm(q[i] - q[j]));
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw DegenerateCorrespondence(std::string(which) + " points coincide or are not finite");
    for (int skip = 0; skip < 4; ++skip) {
        std::array<Vec2, 3> t;
        int k = 0;
        for (int i = 0; i < 4; ++i)
            if (i != skip) t[k++] = q[i];
        if (triangle_area(t[0], t[1], t[2]) <= 1e-12 * scale * scale)
            throw DegenerateCorrespondence(std::string("three ") + which + " points are collinear");
    }
}

// Similarity taking the points to centroid 0 and mean distance sqrt(2).
Eigen::Matrix3d normalizer(const Quad& q) {
    Vec2 c{};
    for (Vec2 p : q) c += p;
    c = c / 4.0;
    double d = 0.0;
    for (Vec2 p : q) d += norm(p - c);
    const double s = std::sqrt(2.0) / (d / 4.0);
    Eigen::Matrix3d t;
    t << s, 0, -s * c.x, 0, s, -s * c.y, 0, 0, 1;
    return t;
}

}  // namespace

Homography estimate_homography(const Quad& src, const Quad& dst) {
    check_general_position(src, "source");
    check_general_position(dst, "destination");
    const Eigen::Matrix3d ts = normalizer(src), td = normalizer(dst);
    Eigen::Matrix<double, 8, 9> a = Eigen::Matrix<double, 8, 9>::Zero();
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector3d p = ts * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
        const Eigen::Vector3d q = td * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
        const double x = p.x() / p.z(), y = p.y() / p.z(), u = q.x() / q.z(), v = q.y() / q.z();
        a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }
    Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
    const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    Homography out{td.inverse() * hn * ts};
    if (std::abs(out.m(2, 2)) > 1e-12 * out.m.norm())
        out.m /= out.m(2, 2);
    else
        out.m /= out.m.norm();
    if (!(std::abs(out.m.determinant()) > 0.0) || !out.m.allFinite())
        throw DegenerateCorrespondence("homography is singular");
    return out;
}

RasterImage warp_perspective(const RasterImage& image, const Homography& h, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) throw InvalidArgument("output dimensions must be > 0");
    image.validate();
    const Homography inv = h.inverse();
    RasterImage out(out_w, out_h);
    for (int v = 0; v < out_h; ++v)
        for (int u = 0; u < out_w; ++u) {
            const Vec2 s = inv.apply({static_cast<double>(u), static_cast<double>(v)});
            const auto px = image.sample(s.x, s.y);
            if (!px) continue;
            for (int c = 0; c < 3; ++c)
                out.at(u, v, c) = static_cast<std::uint8_t>(std::clamp(std::lround((*px)[static_cast<std::size_t>(c)]), 0L, 255L));
        }
    return out;
}

Homography quad_to_rect(const Quad& quad, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) throw InvalidArgument("output dimensions must be > 0");
    const double w = std::max(out_w - 1, 1), hh = std::max(out_h - 1, 1);
    return estimate_homography(quad, {Vec2{0, 0}, Vec2{w, 0}, Vec2{w, hh}, Vec2{0, hh}});
}

RasterImage unwarp(const RasterImage& image, const Quad& mirror_quad, int out_w, int out_h) {
    for (Vec2 p : mirror_quad)
        if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= image.width - 1 && p.y <= image.height - 1))
            throw InvalidArgument("mirror quad corner (" + fmt(p.x) + ", " + fmt(p.y) + ") lies outside the image");
    RasterImage out = warp_perspective(image, quad_to_rect(mirror_quad, out_w, out_h), out_w, out_h);
    return out;
}

DiffImage difference(const RasterImage& image, const RasterImage& reference) {
    if (image.width != reference.width || image.height != reference.height)
        throw DimensionMismatch("image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                                " vs reference " + std::to_string(reference.width) + "x" +
                                std::to_string(reference.height));
    image.validate();
    reference.validate();
    DiffImage d;
    d.width = image.width;
    d.height = image.height;
    d.magnitude.resize(image.data.size());
    d.negative.resize(image.data.size());
    for (std::size_t i = 0; i < image.data.size(); ++i) {
        const int v = static_cast<int>(image.data[i]) - static_cast<int>(reference.data[i]);
        d.magnitude[i] = static_cast<std::uint8_t>(std::abs(v));
        d.negative[i] = v < 0 ? 1 : 0;
    }
    return d;
}

ContactMask localize(const DiffImage& diff, double threshold, int min_blob_px) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("threshold must lie in (0, 1)");
    const int w = diff.width, h = diff.height;
    ContactMask out(w, h);
    int peak = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) peak = std::max(peak, diff.pixel_magnitude(x, y));
    if (peak == 0) return out;
    const double cut = threshold * peak;

    std::vector<int> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };
    std::vector<std::pair<int, int>> stack;
    int best = -1;
    std::size_t best_size = 0;
    int next = 0;
    for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0) {
            if (label[idx(x0, y0)] != -1 || diff.pixel_magnitude(x0, y0) < cut) continue;
            const int id = next++;
            std::size_t size = 0;
            stack.assign(1, {x0, y0});
            label[idx(x0, y0)] = id;
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                ++size;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h || label[idx(nx, ny)] != -1) continue;
                        if (diff.pixel_magnitude(nx, ny) < cut) continue;
                        label[idx(nx, ny)] = id;
                        stack.push_back({nx, ny});
                    }
            }
            if (size >= static_cast<std::size_t>(std::max(min_blob_px, 0)) && size > best_size) {
                best = id;
                best_size = size;
            }
        }
    if (best < 0) return out;
    for (std::size_t i = 0; i < label.size(); ++i) out.bits[i] = label[i] == best ? 1 : 0;
    return out;
}

double dice(const ContactMask& a, const ContactMask& b) {
    if (a.width != b.width || a.height != b.height) throw DimensionMismatch("masks differ in size");
    std::size_t na = 0, nb = 0, both = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        na += a.bits[i] != 0;
        nb += b.bits[i] != 0;
        both += (a.bits[i] != 0) && (b.bits[i] != 0);
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double center_error(const ContactMask& mask, Vec2 truth) {
    const auto c = mask.centroid();
    if (!c) throw EmptyMask("cannot measure the centre of an empty mask");
    return norm(*c - truth);
}

RasterImage resize(const RasterImage& image, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) throw InvalidArgument("output dimensions must be > 0");
    RasterImage out(out_w, out_h);
    out.mm_per_pixel = image.mm_per_pixel;
    const double sx = out_w > 1 ? static_cast<double>(image.width - 1) / (out_w - 1) : 0.0;
    const double sy = out_h > 1 ? static_cast<double>(image.height - 1) / (out_h - 1) : 0.0;
    for (int v = 0; v < out_h; ++v)
        for (int u = 0; u < out_w; ++u) {
            const auto px = image.sample(u * sx, v * sy);
            for (int c = 0; c < 3; ++c)
                out.at(u, v, c) = static_cast<std::uint8_t>(std::clamp(std::lround((*px)[static_cast<std::size_t>(c)]), 0L, 255L));
        }
    return out;
}

RasterImage augment(const RasterImage& image, const AugmentOps& ops, std::uint64_t seed) {
    image.validate();
    Rng rng(seed);
    RasterImage out = image;
    if (ops.crop_fraction != 1.0) {
        if (!(ops.crop_fraction > 0.0 && ops.crop_fraction < 1.0))
            throw InvalidCrop("crop_fraction must lie in (0, 1]");
        const int cw = static_cast<int>(std::lround(image.width * ops.crop_fraction));
        const int ch = static_cast<int>(std::lround(image.height * ops.crop_fraction));
        if (cw < 2 || ch < 2) throw InvalidCrop("crop window smaller than 2 x 2 pixels");
        const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(image.width - cw + 1)));
        const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(image.height - ch + 1)));
        RasterImage crop(cw, ch);
        for (int y = 0; y < ch; ++y)
            for (int x = 0; x < cw; ++x)
                for (int c = 0; c < 3; ++c) crop.at(x, y, c) = image.at(x0 + x, y0 + y, c);
        out = resize(crop, image.width, image.height);
        out.mm_per_pixel = image.mm_per_pixel;
    }
    if (ops.hflip)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width / 2; ++x)
                for (int c = 0; c < 3; ++c) std::swap(out.at(x, y, c), out.at(out.width - 1 - x, y, c));
    if (ops.vflip)
        for (int y = 0; y < out.height / 2; ++y)
            for (int x = 0; x < out.width; ++x)
                for (int c = 0; c < 3; ++c) std::swap(out.at(x, y, c), out.at(x, out.height - 1 - y, c));
    if (ops.brightness < 0.0) throw InvalidArgument("brightness range must be >= 0");
    if (ops.brightness > 0.0) {
        const double shift = rng.uniform(-ops.brightness, ops.brightness);
        for (auto& v : out.data) v = static_cast<std::uint8_t>(std::clamp(std::lround(v + shift), 0L, 255L));
    }
    return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
    csv_row(os, {"case", "center_error_px", "dice"});
    for (const auto& r : rows)
        csv_row(os, {r.name, std::isnan(r.center_error_px) ? "" : fmt(r.center_error_px),
                     std::isnan(r.dice) ? "" : fmt(r.dice)});
}

}  // namespace finray
