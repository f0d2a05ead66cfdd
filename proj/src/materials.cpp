#include "finray/materials.hpp"

#include "finray/errors.hpp"
#include "finray/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace finray {

void DogboneSpec::validate() const {
    if (!(gauge_length > 0.0 && width > 0.0 && thickness > 0.0) || !std::isfinite(gauge_length * width * thickness))
        throw InvalidArgument("dogbone gauge length, width and thickness must be > 0");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double parse_number(const std::string& field, int line) {
    const std::string t = trim(field);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || end != t.data() + t.size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line) + ": '" + t + "' is not a number");
    return v;
}

void check_record(const TensileRecord& r) {
    if (r.samples.empty()) throw InvalidRecord("tensile record has no samples");
    for (std::size_t i = 1; i < r.samples.size(); ++i)
        if (r.samples[i].extension < r.samples[i - 1].extension)
            throw InvalidRecord("extension decreases at sample " + std::to_string(i) + " (" +
                                fmt(r.samples[i - 1].extension) + " -> " + fmt(r.samples[i].extension) + " mm)");
}

}  // namespace

TensileRecord parse_tensile_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool header = false;
    TensileRecord rec;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (!header) {
            if (t != "extension_mm,force_N")
                throw ParseError("line " + std::to_string(lineno) + ": expected header 'extension_mm,force_N'");
            header = true;
            continue;
        }
        const auto comma = t.find(',');
        if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos)
            throw ParseError("line " + std::to_string(lineno) + ": expected two fields");
        rec.samples.push_back({parse_number(t.substr(0, comma), lineno), parse_number(t.substr(comma + 1), lineno)});
    }
    if (!header) throw ParseError("missing header 'extension_mm,force_N'");
    check_record(rec);
    return rec;
}

TensileRecord read_tensile_csv(const std::filesystem::path& path) {
    try {
        return parse_tensile_csv(read_text_file(path));
    } catch (Error& e) {
        e.add_context(path.string());
        throw;
    }
}

void write_tensile_csv(std::ostream& os, const TensileRecord& record) {
    os << "extension_mm,force_N\n";
    for (const auto& s : record.samples) csv_row(os, {fmt(s.extension), fmt(s.force)});
}

StressStrainCurve to_stress_strain(const TensileRecord& record, const DogboneSpec& spec) {
    spec.validate();
    check_record(record);
    StressStrainCurve c;
    c.samples.reserve(record.samples.size());
    const double area = spec.area();
    for (const auto& s : record.samples) c.samples.push_back({s.extension / spec.gauge_length, s.force / area});
    c.break_index = elongation_at_break(c).break_index;
    return c;
}

double initial_modulus(const StressStrainCurve& curve, double max_strain) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : curve.samples) {
        if (s.strain > max_strain) continue;
        n += 1;
        sx += s.strain;
        sy += s.stress;
        sxx += s.strain * s.strain;
        sxy += s.strain * s.stress;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || den <= 0.0) throw InvalidRecord("fewer than two distinct strains below " + fmt(max_strain));
    return (n * sxy - sx * sy) / den;
}

double uts(const StressStrainCurve& curve) {
    if (curve.samples.empty()) throw InvalidRecord("empty stress-strain curve");
    double peak = curve.samples.front().stress;
    for (const auto& s : curve.samples) peak = std::max(peak, s.stress);
    return peak;
}

Elongation elongation_at_break(const StressStrainCurve& curve, double drop_fraction) {
    if (curve.samples.empty()) throw InvalidRecord("empty stress-strain curve");
    if (!(drop_fraction > 0.0 && drop_fraction < 1.0)) throw InvalidArgument("drop_fraction must lie in (0, 1)");
    double peak = curve.samples.front().stress;
    for (std::size_t i = 1; i < curve.samples.size(); ++i) {
        if (curve.samples[i].stress < drop_fraction * peak)
            return {curve.samples[i - 1].strain * 100.0, true, i};
        peak = std::max(peak, curve.samples[i].stress);
    }
    return {curve.samples.back().strain * 100.0, false, std::nullopt};
}

std::vector<TensileSummaryRow> summarize(const std::vector<std::pair<std::string, StressStrainCurve>>& curves,
                                         double drop_fraction) {
    if (curves.empty()) throw InvalidArgument("summary needs at least one curve");
    std::vector<TensileSummaryRow> rows;
    for (const auto& [name, c] : curves) {
        const Elongation e = elongation_at_break(c, drop_fraction);
        rows.push_back({name, uts(c), e.percent, e.broke});
    }
    return rows;
}

void write_summary_csv(std::ostream& os, const std::vector<TensileSummaryRow>& rows) {
    os << "name,UTS_MPa,elongation_pct\n";
    for (const auto& r : rows) csv_row(os, {r.name, fmt(r.uts_mpa), fmt(r.elongation_pct)});
}

void write_stress_strain_csv(std::ostream& os, const StressStrainCurve& curve) {
    os << "strain,stress_MPa\n";
    for (const auto& s : curve.samples) csv_row(os, {fmt(s.strain), fmt(s.stress)});
}

TensileRecord synthetic_tensile_record(const PaintCurveParams& p, const DogboneSpec& spec) {
    spec.validate();
    if (!(p.uts_mpa > 0.0 && p.break_strain > 0.0)) throw InvalidArgument("paint strength and break strain must be > 0");
    if (p.samples < 2 || p.tail < 0) throw InvalidArgument("paint fixture needs >= 2 samples and a tail >= 0");
    const double area = spec.area();
    const double break_ext = p.break_strain * spec.gauge_length;
    const double step = break_ext / (p.samples - 1);
    TensileRecord r;
    for (int i = 0; i < p.samples; ++i) {
        const double s = static_cast<double>(i) / (p.samples - 1);
        const double stress = p.uts_mpa * s * (0.55 + 0.45 * s * s);
        r.samples.push_back({i + 1 == p.samples ? break_ext : break_ext * s, stress * area});
    }
    for (int k = 1; k <= p.tail; ++k) r.samples.push_back({break_ext + k * step, 0.01 * p.uts_mpa * area / k});
    return r;
}

std::vector<PaintCurveParams> reference_paints() {
    return {
        {"acrylic_adhesive_1", 1.37, 12.12},
        {"acrylic_adhesive_2", 1.65, 13.48},
        {"pigment_1", 0.23, 2.67},
        {"pigment_2", 0.26, 2.69},
    };
}

std::string stress_strain_svg(const std::vector<std::pair<std::string, StressStrainCurve>>& curves) {
    static const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
    PlotPanel panel{"stress-strain", "strain (%)", "stress (MPa)", {}};
    std::size_t k = 0;
    for (const auto& [name, c] : curves) {
        PlotSeries s{name, colors[k++ % 6], false, {}};
        for (const auto& p : c.samples) s.points.emplace_back(p.strain * 100.0, p.stress);
        panel.series.push_back(std::move(s));
    }
    return svg_line_panels({panel});
}

}  // namespace finray
