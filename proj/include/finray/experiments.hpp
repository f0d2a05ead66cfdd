#pragma once

#include "finray/design.hpp"
#include "finray/fem.hpp"
#include "finray/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace finray {

enum class ProbeLocation { finger_pad, fingertip };

std::string to_string(ProbeLocation loc);
ProbeLocation probe_location_from_string(const std::string& s);
/// Fraction of the finger length, measured from the base, where the probe sits.
double probe_fraction(ProbeLocation loc);

struct Scenario {
    std::string design;
    std::string indenter;  ///< Indenter::describe()
    ProbeLocation location = ProbeLocation::finger_pad;

    std::string key() const;
};

struct CurveSample {
    double depth = 0.0;  ///< mm
    double force = 0.0;  ///< N, along the approach direction
};

struct ForceDisplacementCurve {
    Scenario scenario;
    std::vector<CurveSample> samples;
    std::vector<std::string> warnings;

    /// Sample value at a sampled depth, linear interpolation otherwise.
    /// Throws DepthOutOfRange outside the sampled range.
    double force_at(double depth) const;
    double max_depth() const { return samples.empty() ? 0.0 : samples.back().depth; }
};

struct IndentationOptions {
    double mesh_size = 0.5;  ///< max element edge, mm
    bool self_contact = true;
    SolveSettings solve;
};

struct IndentationRun {
    ForceDisplacementCurve curve;
    Mesh2D mesh;
    SolverState final_state;  ///< zero displacements when max_depth is 0
};

/// Presses `indenter` into the front surface at `location`, `steps` equal
/// increments up to `max_depth`. Solver errors are rethrown with the scenario
/// key prepended.
IndentationRun simulate_indentation(const FinRayDesign& design, const Indenter& indenter, ProbeLocation location,
                                    double max_depth, int steps, const IndentationOptions& options = {});

ForceDisplacementCurve run_indentation(const FinRayDesign& design, const Indenter& indenter, ProbeLocation location,
                                       double max_depth, int steps, const IndentationOptions& options = {});

// -----------------------------------------------------------------------------
// Compliance
// -----------------------------------------------------------------------------

struct ComplianceEntry {
    std::string design;     ///< curve a
    std::string reference;  ///< curve b
    std::string indenter;
    ProbeLocation location = ProbeLocation::finger_pad;
    double depth = 0.0;
    double force = 0.0;
    double reference_force = 0.0;
    double reduction_pct = 0.0;  ///< (F_b - F_a) / F_b * 100
};

struct ComplianceReport {
    std::vector<ComplianceEntry> entries;
    double min_reduction = 0.0;
    double max_reduction = 0.0;

    void append(const ComplianceReport& other);
};

/// Force reduction of `a` relative to the reference `b`. Throws DepthOutOfRange
/// when a depth is not covered by both curves, InvalidArgument when the
/// reference force is zero but `a` is not.
ComplianceReport compare_compliance(const ForceDisplacementCurve& a, const ForceDisplacementCurve& b,
                                    const std::vector<double>& depths);

// -----------------------------------------------------------------------------
// Two-design, two-indenter, two-location protocol
// -----------------------------------------------------------------------------

struct ProtocolSettings {
    double max_depth = 5.0;
    int steps = 20;
    Indenter cylinder = Indenter::circle(5.0);
    Indenter cuboid = Indenter::rectangle(10.0, 10.0);
    IndentationOptions indentation;
    /// Compliance probe depths; empty means every sampled depth >= min_compliance_depth.
    std::vector<double> compliance_depths;
    double min_compliance_depth = 0.5;
    /// Worker threads; 0 reads FINRAY_THREADS, falling back to the hardware count.
    int threads = 0;
};

struct ProtocolResult {
    /// Ordered design, then indenter (cylinder, cuboid), then location (pad, tip).
    std::vector<ForceDisplacementCurve> curves;
    ComplianceReport compliance;  ///< designs[0] against the reference designs[1]
    std::vector<std::string> failures;
    std::vector<std::string> warnings;

    const ForceDisplacementCurve* find(const std::string& design, const std::string& indenter,
                                       ProbeLocation location) const;
};

/// Runs all eight scenarios. Individual failures are collected in `failures`
/// and the remaining scenarios still run.
ProtocolResult fig5_protocol(const std::vector<FinRayDesign>& designs, const ProtocolSettings& settings = {});

void write_curve_csv(std::ostream& os, const std::vector<ForceDisplacementCurve>& curves);
void write_compliance_csv(std::ostream& os, const ComplianceReport& report);
/// Two panels (cylinder, cuboid); colour per design, dashed for the fingertip.
std::string fig5_svg(const ProtocolResult& result, const ProtocolSettings& settings = {});
/// Writes curves.csv, compliance.csv and fig5.svg into `dir`.
void write_protocol_report(const std::filesystem::path& dir, const ProtocolResult& result,
                           const ProtocolSettings& settings = {});

int worker_threads(int requested);

}  // namespace finray
