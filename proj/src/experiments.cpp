#include "finray/experiments.hpp"

#include "finray/errors.hpp"
#include "finray/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace finray {

std::string to_string(ProbeLocation loc) {
    return loc == ProbeLocation::finger_pad ? "finger_pad" : "fingertip";
}

ProbeLocation probe_location_from_string(const std::string& s) {
    if (s == "finger_pad" || s == "pad") return ProbeLocation::finger_pad;
    if (s == "fingertip" || s == "tip") return ProbeLocation::fingertip;
    throw InvalidArgument("unknown probe location '" + s + "' (expected finger_pad or fingertip)");
}

double probe_fraction(ProbeLocation loc) { return loc == ProbeLocation::finger_pad ? 0.40 : 0.85; }

std::string Scenario::key() const { return design + "/" + indenter + "/" + to_string(location); }

double ForceDisplacementCurve::force_at(double depth) const {
    if (samples.empty()) throw DepthOutOfRange(scenario.key() + ": empty curve");
    for (const auto& s : samples)
        if (s.depth == depth) return s.force;
    const double lo = samples.front().depth, hi = samples.back().depth;
    if (!(depth >= lo && depth <= hi))
        throw DepthOutOfRange(scenario.key() + ": depth " + fmt(depth) + " mm outside [" + fmt(lo) + ", " + fmt(hi) +
                              "]");
    auto it = std::lower_bound(samples.begin(), samples.end(), depth,
                               [](const CurveSample& s, double d) { return s.depth < d; });
    const CurveSample& b = *it;
    const CurveSample& a = *(it - 1);
    const double t = (depth - a.depth) / (b.depth - a.depth);
    return a.force + t * (b.force - a.force);
}

IndentationRun simulate_indentation(const FinRayDesign& design, const Indenter& indenter, ProbeLocation location,
                                    double max_depth, int steps, const IndentationOptions& options) {
    Scenario scenario{design.name, indenter.describe(), location};
    if (!(max_depth >= 0.0) || !std::isfinite(max_depth))
        throw InvalidArgument(scenario.key() + ": max_depth must be >= 0, got " + fmt(max_depth));
    if (steps < 1) throw InvalidArgument(scenario.key() + ": steps must be >= 1");

    IndentationRun run;
    run.curve.scenario = scenario;
    run.curve.samples.push_back({0.0, 0.0});
    try {
        run.mesh = generate_mesh(design, options.mesh_size);
        run.final_state.displacements.assign(run.mesh.nodes.size(), Vec2{});
        run.final_state.external_forces.assign(run.mesh.nodes.size(), Vec2{});
        run.final_state.contact_forces.assign(run.mesh.nodes.size(), Vec2{});
        run.final_state.reaction_forces.assign(run.mesh.nodes.size(), Vec2{});
        if (max_depth == 0.0) return run;

        const SurfacePoint probe = front_surface_point(design, probe_fraction(location));
        const Indenter placed = indenter.touching(probe.point, probe.outward);
        const ContactSpec contact = default_contact(run.mesh, design.materials, placed, options.self_contact);
        BoundaryConditions bc = BoundaryConditions::clamped(run.mesh);
        bc.indenter_depth = max_depth;
        SolveSettings solve = options.solve;
        solve.load_steps = steps;

        const auto states = solve_static(run.mesh, design.materials, bc, contact, solve);
        for (const auto& st : states) run.curve.samples.push_back({st.indenter_depth, dot(st.indenter_force, placed.approach)});
        run.final_state = states.back();
    } catch (Error& e) {
        e.add_context(scenario.key());
        throw;
    }

    double peak = 0.0;
    for (const auto& s : run.curve.samples) peak = std::max(peak, s.force);
    double running = 0.0;
    for (const auto& s : run.curve.samples) {
        if (s.force < running - 0.01 * peak) {
            run.curve.warnings.push_back(scenario.key() + ": force drops to " + fmt(s.force) + " N at depth " +
                                         fmt(s.depth) + " mm (previous max " + fmt(running) + " N)");
        }
        running = std::max(running, s.force);
    }
    return run;
}

ForceDisplacementCurve run_indentation(const FinRayDesign& design, const Indenter& indenter, ProbeLocation location,
                                       double max_depth, int steps, const IndentationOptions& options) {
    return simulate_indentation(design, indenter, location, max_depth, steps, options).curve;
}

void ComplianceReport::append(const ComplianceReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    if (entries.empty()) return;
    min_reduction = max_reduction = entries.front().reduction_pct;
    for (const auto& e : entries) {
        min_reduction = std::min(min_reduction, e.reduction_pct);
        max_reduction = std::max(max_reduction, e.reduction_pct);
    }
}

ComplianceReport compare_compliance(const ForceDisplacementCurve& a, const ForceDisplacementCurve& b,
                                    const std::vector<double>& depths) {
    ComplianceReport part;
    for (double d : depths) {
        ComplianceEntry e;
        e.design = a.scenario.design;
        e.reference = b.scenario.design;
        e.indenter = b.scenario.indenter;
        e.location = b.scenario.location;
        e.depth = d;
        e.force = a.force_at(d);
        e.reference_force = b.force_at(d);
        if (e.reference_force == 0.0) {
            if (e.force != 0.0)
                throw InvalidArgument(b.scenario.key() + ": reference force is zero at depth " + fmt(d) + " mm");
            e.reduction_pct = 0.0;
        } else {
            e.reduction_pct = (e.reference_force - e.force) / e.reference_force * 100.0;
        }
        part.entries.push_back(e);
    }
    ComplianceReport out;
    out.append(part);
    return out;
}

// -----------------------------------------------------------------------------

int worker_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FINRAY_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 256));
        throw InvalidArgument(std::string("FINRAY_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u));
}

const ForceDisplacementCurve* ProtocolResult::find(const std::string& design, const std::string& indenter,
                                                   ProbeLocation location) const {
    for (const auto& c : curves)
        if (c.scenario.design == design && c.scenario.indenter == indenter && c.scenario.location == location)
            return &c;
    return nullptr;
}

ProtocolResult fig5_protocol(const std::vector<FinRayDesign>& designs, const ProtocolSettings& settings) {
    if (designs.size() != 2) throw InvalidArgument("protocol needs exactly two designs (candidate, reference)");
    if (designs[0].name == designs[1].name)
        throw InvalidArgument("protocol designs need distinct names, both are '" + designs[0].name + "'");

    struct Job {
        std::size_t design;
        const Indenter* indenter;
        ProbeLocation location;
    };
    std::vector<Job> jobs;
    for (std::size_t d = 0; d < designs.size(); ++d)
        for (const Indenter* ind : {&settings.cylinder, &settings.cuboid})
            for (ProbeLocation loc : {ProbeLocation::finger_pad, ProbeLocation::fingertip})
                jobs.push_back({d, ind, loc});

    std::vector<std::optional<ForceDisplacementCurve>> slots(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const Job& j = jobs[i];
            try {
                slots[i] = run_indentation(designs[j.design], *j.indenter, j.location, settings.max_depth,
                                           settings.steps, settings.indentation);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int n = std::min<int>(worker_threads(settings.threads), static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    ProtocolResult result;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (slots[i]) {
            for (const auto& w : slots[i]->warnings) result.warnings.push_back(w);
            result.curves.push_back(std::move(*slots[i]));
        } else {
            result.failures.push_back(errors[i]);
        }
    }

    for (const Indenter* ind : {&settings.cylinder, &settings.cuboid}) {
        for (ProbeLocation loc : {ProbeLocation::finger_pad, ProbeLocation::fingertip}) {
            const auto* a = result.find(designs[0].name, ind->describe(), loc);
            const auto* b = result.find(designs[1].name, ind->describe(), loc);
            if (!a || !b) continue;
            std::vector<double> depths = settings.compliance_depths;
            if (depths.empty())
                for (const auto& s : b->samples)
                    if (s.depth >= settings.min_compliance_depth) depths.push_back(s.depth);
            try {
                result.compliance.append(compare_compliance(*a, *b, depths));
            } catch (const std::exception& e) {
                result.failures.push_back(e.what());
            }
        }
    }
    return result;
}

void write_curve_csv(std::ostream& os, const std::vector<ForceDisplacementCurve>& curves) {
    csv_row(os, {"design", "indenter", "location", "step", "depth_mm", "force_N"});
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.samples.size(); ++i)
            csv_row(os, {c.scenario.design, c.scenario.indenter, to_string(c.scenario.location), std::to_string(i),
                         fmt(c.samples[i].depth), fmt(c.samples[i].force)});
}

void write_compliance_csv(std::ostream& os, const ComplianceReport& report) {
    csv_row(os, {"design", "reference", "indenter", "location", "depth_mm", "force_N", "reference_force_N",
                 "force_reduction_pct"});
    for (const auto& e : report.entries)
        csv_row(os, {e.design, e.reference, e.indenter, to_string(e.location), fmt(e.depth), fmt(e.force),
                     fmt(e.reference_force), fmt(e.reduction_pct)});
}

std::string fig5_svg(const ProtocolResult& result, const ProtocolSettings& settings) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::vector<std::string> designs;
    for (const auto& c : result.curves)
        if (std::find(designs.begin(), designs.end(), c.scenario.design) == designs.end())
            designs.push_back(c.scenario.design);

    std::vector<PlotPanel> panels;
    for (const auto& [title, ind] : {std::pair<const char*, const Indenter*>{"cylinder", &settings.cylinder},
                                     std::pair<const char*, const Indenter*>{"cuboid", &settings.cuboid}}) {
        PlotPanel panel;
        panel.title = std::string(title) + " indenter (" + ind->describe() + ")";
        panel.x_label = "displacement (mm)";
        panel.y_label = "force (N)";
        for (std::size_t d = 0; d < designs.size(); ++d)
            for (ProbeLocation loc : {ProbeLocation::finger_pad, ProbeLocation::fingertip}) {
                const auto* c = result.find(designs[d], ind->describe(), loc);
                if (!c) continue;
                PlotSeries s;
                s.label = designs[d] + " " + to_string(loc);
                s.color = palette[d % 4];
                s.dashed = loc == ProbeLocation::fingertip;
                for (const auto& p : c->samples) s.points.emplace_back(p.depth, p.force);
                panel.series.push_back(std::move(s));
            }
        panels.push_back(std::move(panel));
    }
    return svg_line_panels(panels);
}

void write_protocol_report(const std::filesystem::path& dir, const ProtocolResult& result,
                           const ProtocolSettings& settings) {
    std::ostringstream curves, compliance;
    write_curve_csv(curves, result.curves);
    write_compliance_csv(compliance, result.compliance);
    write_text_file(dir / "curves.csv", curves.str());
    write_text_file(dir / "compliance.csv", compliance.str());
    write_text_file(dir / "fig5.svg", fig5_svg(result, settings));
}

}  // namespace finray
