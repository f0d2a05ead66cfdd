#pragma once

#include "finray/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace finray {

/// Shortest round-trip-safe text for a double ("%.17g" trimmed to "%.9g"
/// when that is exact). Locale independent.
std::string fmt(double v);
/// Fixed decimals, e.g. fmt_fixed(1.5, 3) == "1.500".
std::string fmt_fixed(double v, int decimals);

/// Writes one CSV line; fields containing separators or quotes are quoted.
void csv_row(std::ostream& os, const std::vector<std::string>& fields);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// -----------------------------------------------------------------------------
// SVG
// -----------------------------------------------------------------------------

struct PlotSeries {
    std::string label;
    std::string color = "#000000";
    bool dashed = false;
    std::vector<std::pair<double, double>> points;
};

struct PlotPanel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

/// Side-by-side line plots with shared styling and per-panel legends.
std::string svg_line_panels(const std::vector<PlotPanel>& panels, double panel_width = 420.0,
                            double panel_height = 320.0);

/// Minimal drawing surface in world coordinates (y up), scaled to fit `bounds`.
class SvgCanvas {
public:
    SvgCanvas(Vec2 world_min, Vec2 world_max, double pixels_per_unit, double margin = 20.0);

    void line(Vec2 a, Vec2 b, const std::string& color, double width = 1.0, bool dashed = false);
    void polyline(const std::vector<Vec2>& pts, const std::string& color, double width = 1.0, bool closed = false,
                  const std::string& fill = "none", double opacity = 1.0);
    void circle(Vec2 c, double r_world, const std::string& color, const std::string& fill = "none");
    void text(Vec2 at, const std::string& s, double size = 10.0, const std::string& color = "#000000");

    std::string str() const;

private:
    Vec2 lo_, hi_;
    double scale_, margin_;
    std::string body_;
    Vec2 map(Vec2 p) const;
};

std::string xml_escape(const std::string& s);

}  // namespace finray
