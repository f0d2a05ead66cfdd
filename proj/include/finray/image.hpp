#pragma once

#include "finray/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace finray {

/// 8-bit RGB, row-major.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  ///< width * height * 3
    std::optional<double> mm_per_pixel;

    RasterImage() = default;
    RasterImage(int w, int h, std::uint8_t fill = 0);

    std::uint8_t& at(int x, int y, int c) { return data[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c) const { return data[index(x, y, c)]; }
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
               static_cast<std::size_t>(c);
    }
    /// Bilinear sample at continuous pixel-centre coordinates; nullopt outside
    /// [0, width-1] x [0, height-1].
    std::optional<std::array<double, 3>> sample(double x, double y) const;
    void validate() const;

    bool operator==(const RasterImage&) const = default;
};

/// Per-channel signed difference, kept as magnitude plus sign so both planes
/// survive 8-bit storage.
struct DiffImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> magnitude;  ///< |image - reference|, 3 per pixel
    std::vector<std::uint8_t> negative;   ///< 1 where image < reference

    int value(int x, int y, int c) const;
    /// Largest channel magnitude at a pixel.
    int pixel_magnitude(int x, int y) const;
    RasterImage magnitude_image() const;
    RasterImage sign_image() const;  ///< 255 where negative
    static DiffImage from_planes(const RasterImage& magnitude, const RasterImage& sign);
};

struct ContactMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  ///< 0 / 1

    ContactMask() = default;
    ContactMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

    bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] != 0; }
    void set(int x, int y, bool v = true) {
        bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = v ? 1 : 0;
    }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    /// Mean of the set pixel coordinates.
    std::optional<Vec2> centroid() const;
    /// Inclusive pixel bounds {min_x, min_y, max_x, max_y}; nullopt when empty.
    std::optional<std::array<int, 4>> bounds() const;

    RasterImage to_image() const;
    static ContactMask from_image(const RasterImage& img);

    bool operator==(const ContactMask&) const = default;
};

/// Binary PPM (P6). P5 input is expanded to RGB. A `# mm_per_pixel <v>`
/// comment carries the scale. Throws ParseError / IoError.
RasterImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RasterImage& image);
RasterImage decode_ppm(const std::string& bytes);
std::string encode_ppm(const RasterImage& image);

}  // namespace finray
