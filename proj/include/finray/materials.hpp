#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace finray {

/// Dogbone gauge section, mm.
struct DogboneSpec {
    double gauge_length = 33.0;
    double width = 6.0;
    double thickness = 2.0;

    void validate() const;
    double area() const { return width * thickness; }
};

struct TensileSample {
    double extension;  ///< mm
    double force;      ///< N
};

struct TensileRecord {
    std::vector<TensileSample> samples;
};

/// CSV with header `extension_mm,force_N`. Throws ParseError / InvalidRecord.
TensileRecord parse_tensile_csv(const std::string& text);
TensileRecord read_tensile_csv(const std::filesystem::path& path);
void write_tensile_csv(std::ostream& os, const TensileRecord& record);

struct StressStrainSample {
    double strain;  ///< dimensionless
    double stress;  ///< MPa (= N/mm^2)
};

struct StressStrainCurve {
    std::vector<StressStrainSample> samples;
    std::optional<std::size_t> break_index;  ///< first sample past rupture
};

/// Engineering stress and strain; break_index found with the default drop
/// fraction. Throws InvalidRecord.
StressStrainCurve to_stress_strain(const TensileRecord& record, const DogboneSpec& spec);

/// Least-squares slope (MPa) of the samples with strain <= max_strain.
double initial_modulus(const StressStrainCurve& curve, double max_strain = 0.1);

/// Largest stress over the curve.
double uts(const StressStrainCurve& curve);

struct Elongation {
    double percent = 0.0;
    bool broke = false;
    std::optional<std::size_t> break_index;
};

/// Break = first sample whose stress falls below drop_fraction times the
/// running peak; reports the strain of the sample before it.
Elongation elongation_at_break(const StressStrainCurve& curve, double drop_fraction = 0.5);

struct TensileSummaryRow {
    std::string name;
    double uts_mpa;
    double elongation_pct;
    bool broke;
};

std::vector<TensileSummaryRow> summarize(const std::vector<std::pair<std::string, StressStrainCurve>>& curves,
                                         double drop_fraction = 0.5);
/// Header `name,UTS_MPa,elongation_pct`.
void write_summary_csv(std::ostream& os, const std::vector<TensileSummaryRow>& rows);
/// Header `strain,stress_MPa`.
void write_stress_strain_csv(std::ostream& os, const StressStrainCurve& curve);

/// Fixture shape: stiffening rise to `uts_mpa` at `break_strain`, then a
/// ruptured tail near zero force.
struct PaintCurveParams {
    std::string name;
    double uts_mpa;
    double break_strain;
    int samples = 200;   ///< up to and including the break
    int tail = 5;        ///< post-rupture samples
};

TensileRecord synthetic_tensile_record(const PaintCurveParams& params, const DogboneSpec& spec);

/// Four paint fixtures at the tabulated strength and elongation values.
std::vector<PaintCurveParams> reference_paints();

/// Stress-strain plot of several named curves (strain in percent).
std::string stress_strain_svg(const std::vector<std::pair<std::string, StressStrainCurve>>& curves);

}  // namespace finray
