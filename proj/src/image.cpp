#include "finray/image.hpp"

#include "finray/errors.hpp"
#include "finray/report.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

namespace finray {

RasterImage::RasterImage(int w, int h, std::uint8_t fill) : width(w), height(h) {
    if (w < 0 || h < 0) throw InvalidArgument("image dimensions must be >= 0");
    data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill);
}

void RasterImage::validate() const {
    if (width < 0 || height < 0) throw InvalidArgument("image dimensions must be >= 0");
    if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3)
        throw InvalidArgument("image data length does not match width x height x 3");
    if (mm_per_pixel && !(*mm_per_pixel > 0.0)) throw InvalidArgument("mm_per_pixel must be > 0");
}

std::optional<std::array<double, 3>> RasterImage::sample(double x, double y) const {
    if (width == 0 || height == 0) return std::nullopt;
    constexpr double eps = 1e-9;
    if (!(x >= -eps && y >= -eps && x <= width - 1 + eps && y <= height - 1 + eps)) return std::nullopt;
    x = std::clamp(x, 0.0, static_cast<double>(width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height - 1));
    const int x0 = std::min(static_cast<int>(x), std::max(width - 2, 0));
    const int y0 = std::min(static_cast<int>(y), std::max(height - 2, 0));
    const int x1 = std::min(x0 + 1, width - 1), y1 = std::min(y0 + 1, height - 1);
    const double fx = x - x0, fy = y - y0;
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        const double top = at(x0, y0, c) * (1 - fx) + at(x1, y0, c) * fx;
        const double bot = at(x0, y1, c) * (1 - fx) + at(x1, y1, c) * fx;
        out[static_cast<std::size_t>(c)] = top * (1 - fy) + bot * fy;
    }
    return out;
}

int DiffImage::value(int x, int y, int c) const {
    const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
                          static_cast<std::size_t>(c);
    return negative[i] ? -static_cast<int>(magnitude[i]) : static_cast<int>(magnitude[i]);
}

int DiffImage::pixel_magnitude(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    return std::max({magnitude[i], magnitude[i + 1], magnitude[i + 2]});
}

RasterImage DiffImage::magnitude_image() const {
    RasterImage img(width, height);
    img.data = magnitude;
    return img;
}

RasterImage DiffImage::sign_image() const {
    RasterImage img(width, height);
    for (std::size_t i = 0; i < negative.size(); ++i) img.data[i] = negative[i] ? 255 : 0;
    return img;
}

DiffImage DiffImage::from_planes(const RasterImage& magnitude, const RasterImage& sign) {
    if (magnitude.width != sign.width || magnitude.height != sign.height)
        throw DimensionMismatch("magnitude and sign planes differ in size");
    DiffImage d;
    d.width = magnitude.width;
    d.height = magnitude.height;
    d.magnitude = magnitude.data;
    d.negative.resize(sign.data.size());
    for (std::size_t i = 0; i < sign.data.size(); ++i) d.negative[i] = sign.data[i] >= 128 ? 1 : 0;
    return d;
}

std::size_t ContactMask::count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
}

std::optional<Vec2> ContactMask::centroid() const {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (get(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) return std::nullopt;
    return Vec2{sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

std::optional<std::array<int, 4>> ContactMask::bounds() const {
    std::array<int, 4> b{width, height, -1, -1};
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (get(x, y)) {
                b[0] = std::min(b[0], x);
                b[1] = std::min(b[1], y);
                b[2] = std::max(b[2], x);
                b[3] = std::max(b[3], y);
            }
    if (b[2] < 0) return std::nullopt;
    return b;
}

RasterImage ContactMask::to_image() const {
    RasterImage img(width, height);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = 255;
    return img;
}

ContactMask ContactMask::from_image(const RasterImage& img) {
    ContactMask m(img.width, img.height);
    for (std::size_t i = 0; i < m.bits.size(); ++i)
        m.bits[i] = (img.data[3 * i] | img.data[3 * i + 1] | img.data[3 * i + 2]) >= 128 ? 1 : 0;
    return m;
}

// -----------------------------------------------------------------------------
// PPM
// -----------------------------------------------------------------------------

namespace {

class HeaderReader {
public:
    explicit HeaderReader(const std::string& s) : s_(s) {}

    std::string token() {
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) throw ParseError("truncated PPM header");
        return s_.substr(start, pos_ - start);
    }
    int integer() {
        const std::string t = token();
        char* end = nullptr;
        const long v = std::strtol(t.c_str(), &end, 10);
        if (*end != '\0' || v < 0 || v > 1 << 20) throw ParseError("bad PPM header field '" + t + "'");
        return static_cast<int>(v);
    }
    // Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_start() {
        if (pos_ >= s_.size() || !std::isspace(static_cast<unsigned char>(s_[pos_])))
            throw ParseError("missing whitespace after PPM header");
        return pos_ + 1;
    }
    std::optional<double> scale;

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    void skip() {
        while (pos_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            } else if (s_[pos_] == '#') {
                const std::size_t eol = s_.find('\n', pos_);
                const std::string line = s_.substr(pos_ + 1, eol == std::string::npos ? std::string::npos : eol - pos_ - 1);
                const std::string key = " mm_per_pixel ";
                if (line.rfind(key, 0) == 0) {
                    char* end = nullptr;
                    const double v = std::strtod(line.c_str() + key.size(), &end);
                    if (v > 0.0 && std::isfinite(v)) scale = v;
                }
                pos_ = eol == std::string::npos ? s_.size() : eol + 1;
            } else {
                break;
            }
        }
    }
};

}  // namespace

RasterImage decode_ppm(const std::string& bytes) {
    HeaderReader r(bytes);
    const std::string magic = r.token();
    if (magic != "P6" && magic != "P5") throw ParseError("not a binary PPM/PGM (magic '" + magic + "')");
    const int w = r.integer(), h = r.integer(), maxval = r.integer();
    if (maxval != 255) throw ParseError("only 8-bit PPM (maxval 255) is supported");
    const std::size_t start = r.raster_start();
    const std::size_t channels = magic == "P6" ? 3 : 1;
    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels;
    if (bytes.size() < start + need) throw ParseError("PPM raster truncated");
    RasterImage img(w, h);
    img.mm_per_pixel = r.scale;
    if (channels == 3) {
        for (std::size_t i = 0; i < need; ++i) img.data[i] = static_cast<std::uint8_t>(bytes[start + i]);
    } else {
        for (std::size_t i = 0; i < need; ++i)
            img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = static_cast<std::uint8_t>(bytes[start + i]);
    }
    return img;
}

std::string encode_ppm(const RasterImage& image) {
    image.validate();
    std::string out = "P6\n";
    if (image.mm_per_pixel) out += "# mm_per_pixel " + fmt(*image.mm_per_pixel) + "\n";
    out += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.data.data()), image.data.size());
    return out;
}

RasterImage read_ppm(const std::filesystem::path& path) {
    try {
        return decode_ppm(read_text_file(path));
    } catch (ParseError& e) {
        e.add_context(path.string());
        throw;
    }
}

void write_ppm(const std::filesystem::path& path, const RasterImage& image) { write_text_file(path, encode_ppm(image)); }

}  // namespace finray
