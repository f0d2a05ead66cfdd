#include "finray/report.hpp"

#include "finray/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace finray {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

void csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") == std::string::npos) {
            os << f;
            continue;
        }
        os << '"';
        for (char c : f) {
            if (c == '"') os << '"';
            os << c;
        }
        os << '"';
    }
    os << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

namespace {

// 1-2-5 tick spacing giving roughly `target` intervals.
double nice_step(double span, int target) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

std::string num(double v) { return fmt_fixed(v, 2); }

}  // namespace

std::string svg_line_panels(const std::vector<PlotPanel>& panels, double pw, double ph) {
    const double left = 60.0, right = 20.0, top = 36.0, bottom = 48.0;
    const double width = pw * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(ph)
       << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const PlotPanel& panel = panels[p];
        double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
        bool any = false;
        for (const auto& s : panel.series)
            for (const auto& [x, y] : s.points) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                if (!any) {
                    x0 = x1 = x;
                    y0 = y1 = y;
                    any = true;
                }
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        x0 = std::min(x0, 0.0);
        y0 = std::min(y0, 0.0);
        if (x1 <= x0) x1 = x0 + 1.0;
        if (y1 <= y0) y1 = y0 + 1.0;
        const double xs = nice_step(x1 - x0, 5), ys = nice_step(y1 - y0, 5);
        x1 = std::ceil(x1 / xs) * xs;
        y1 = std::ceil(y1 / ys) * ys;

        const double ox = pw * static_cast<double>(p);
        const double plot_w = pw - left - right, plot_h = ph - top - bottom;
        auto X = [&](double x) { return ox + left + (x - x0) / (x1 - x0) * plot_w; };
        auto Y = [&](double y) { return top + plot_h - (y - y0) / (y1 - y0) * plot_h; };

        os << "<g>\n";
        os << "<text x=\"" << num(ox + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
           << xml_escape(panel.title) << "</text>\n";
        os << "<rect x=\"" << num(X(x0)) << "\" y=\"" << num(Y(y1)) << "\" width=\"" << num(plot_w) << "\" height=\""
           << num(plot_h) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
        for (double t = x0; t <= x1 + 1e-9 * xs; t += xs) {
            os << "<line x1=\"" << num(X(t)) << "\" y1=\"" << num(Y(y0)) << "\" x2=\"" << num(X(t)) << "\" y2=\""
               << num(Y(y0) + 4) << "\" stroke=\"#444444\"/>";
            os << "<text x=\"" << num(X(t)) << "\" y=\"" << num(Y(y0) + 16) << "\" text-anchor=\"middle\" font-size=\"10\">"
               << fmt(std::round(t / xs) * xs) << "</text>\n";
        }
        for (double t = y0; t <= y1 + 1e-9 * ys; t += ys) {
            os << "<line x1=\"" << num(X(x0) - 4) << "\" y1=\"" << num(Y(t)) << "\" x2=\"" << num(X(x0)) << "\" y2=\""
               << num(Y(t)) << "\" stroke=\"#444444\"/>";
            os << "<text x=\"" << num(X(x0) - 6) << "\" y=\"" << num(Y(t) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
               << fmt(std::round(t / ys) * ys) << "</text>\n";
        }
        os << "<text x=\"" << num(ox + left + plot_w / 2) << "\" y=\"" << num(ph - 10)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << xml_escape(panel.x_label) << "</text>\n";
        os << "<text transform=\"translate(" << num(ox + 16) << "," << num(top + plot_h / 2)
           << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">" << xml_escape(panel.y_label) << "</text>\n";

        for (std::size_t si = 0; si < panel.series.size(); ++si) {
            const PlotSeries& s = panel.series[si];
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
               << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
            for (std::size_t i = 0; i < s.points.size(); ++i)
                os << (i ? " " : "") << num(X(s.points[i].first)) << "," << num(Y(s.points[i].second));
            os << "\"/>\n";
            const double ly = top + 14.0 + 14.0 * static_cast<double>(si);
            os << "<line x1=\"" << num(ox + left + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(ox + left + 30)
               << "\" y2=\"" << num(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
               << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>";
            os << "<text x=\"" << num(ox + left + 34) << "\" y=\"" << num(ly + 3) << "\" font-size=\"10\">"
               << xml_escape(s.label) << "</text>\n";
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

SvgCanvas::SvgCanvas(Vec2 world_min, Vec2 world_max, double pixels_per_unit, double margin)
    : lo_(world_min), hi_(world_max), scale_(pixels_per_unit), margin_(margin) {
    if (!(hi_.x > lo_.x) || !(hi_.y > lo_.y) || !(scale_ > 0.0)) throw InvalidArgument("empty SVG canvas");
}

Vec2 SvgCanvas::map(Vec2 p) const {
    return {margin_ + (p.x - lo_.x) * scale_, margin_ + (hi_.y - p.y) * scale_};
}

void SvgCanvas::line(Vec2 a, Vec2 b, const std::string& color, double width, bool dashed) {
    const Vec2 p = map(a), q = map(b);
    body_ += "<line x1=\"" + num(p.x) + "\" y1=\"" + num(p.y) + "\" x2=\"" + num(q.x) + "\" y2=\"" + num(q.y) +
             "\" stroke=\"" + color + "\" stroke-width=\"" + num(width) + "\"" +
             (dashed ? " stroke-dasharray=\"4,3\"" : "") + "/>\n";
}

void SvgCanvas::polyline(const std::vector<Vec2>& pts, const std::string& color, double width, bool closed,
                         const std::string& fill, double opacity) {
    body_ += closed ? "<polygon" : "<polyline";
    body_ += " fill=\"" + fill + "\" fill-opacity=\"" + num(opacity) + "\" stroke=\"" + color + "\" stroke-width=\"" +
             num(width) + "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 p = map(pts[i]);
        body_ += (i ? " " : "") + num(p.x) + "," + num(p.y);
    }
    body_ += "\"/>\n";
}

void SvgCanvas::circle(Vec2 c, double r_world, const std::string& color, const std::string& fill) {
    const Vec2 p = map(c);
    body_ += "<circle cx=\"" + num(p.x) + "\" cy=\"" + num(p.y) + "\" r=\"" + num(r_world * scale_) + "\" stroke=\"" +
             color + "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::text(Vec2 at, const std::string& s, double size, const std::string& color) {
    const Vec2 p = map(at);
    body_ += "<text x=\"" + num(p.x) + "\" y=\"" + num(p.y) + "\" font-size=\"" + num(size) + "\" fill=\"" + color +
             "\" font-family=\"sans-serif\">" + xml_escape(s) + "</text>\n";
}

std::string SvgCanvas::str() const {
    const double w = 2.0 * margin_ + (hi_.x - lo_.x) * scale_;
    const double h = 2.0 * margin_ + (hi_.y - lo_.y) * scale_;
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n" + body_ + "</svg>\n";
}

}  // namespace finray
