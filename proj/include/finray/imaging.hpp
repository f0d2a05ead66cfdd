#pragma once

#include "finray/image.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace finray {

using Quad = std::array<Vec2, 4>;

struct Homography {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

    /// Projective map; non-finite when the point maps to infinity.
    Vec2 apply(Vec2 p) const;
    Homography inverse() const;
};

/// DLT with Hartley normalisation; exact for four correspondences.
/// Throws DegenerateCorrespondence when three points of either set are collinear.
Homography estimate_homography(const Quad& src, const Quad& dst);

/// out(u, v) = bilinear sample of `image` at H^-1(u, v); black outside the source.
RasterImage warp_perspective(const RasterImage& image, const Homography& h, int out_w, int out_h);

/// Maps the mirror quad (corners in order top-left, top-right, bottom-right,
/// bottom-left, pixel-centre coordinates) onto an out_w x out_h rectangle.
RasterImage unwarp(const RasterImage& image, const Quad& mirror_quad, int out_w = 240, int out_h = 135);
/// Homography from a quad to the corner pixel centres of an out_w x out_h image.
Homography quad_to_rect(const Quad& quad, int out_w, int out_h);

/// Throws DimensionMismatch.
DiffImage difference(const RasterImage& image, const RasterImage& reference);

/// Largest 8-connected component of pixels with magnitude >= threshold * max,
/// ignoring components smaller than min_blob_px. Throws InvalidArgument
/// unless 0 < threshold < 1.
ContactMask localize(const DiffImage& diff, double threshold = 0.25, int min_blob_px = 20);

/// 2|A n B| / (|A| + |B|), 1 when both are empty. Throws DimensionMismatch.
double dice(const ContactMask& a, const ContactMask& b);
/// Distance from the mask centroid to `truth` (pixels). Throws EmptyMask.
double center_error(const ContactMask& mask, Vec2 truth);

struct AugmentOps {
    bool hflip = false;
    bool vflip = false;
    double brightness = 0.0;     ///< shift drawn uniformly from [-brightness, brightness]
    double crop_fraction = 1.0;  ///< side fraction kept before resizing back; 1 disables
};

/// Deterministic for a given seed; dimensions preserved. Throws InvalidCrop.
RasterImage augment(const RasterImage& image, const AugmentOps& ops, std::uint64_t seed);

/// Bilinear resize using pixel-centre alignment.
RasterImage resize(const RasterImage& image, int out_w, int out_h);

struct MetricRow {
    std::string name;
    double center_error_px = 0.0;  ///< NaN when not applicable
    double dice = 0.0;             ///< NaN when not applicable
};

/// Header `case,center_error_px,dice`; NaN written as empty fields.
void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows);

}  // namespace finray
