#pragma once

#include "finray/design.hpp"
#include "finray/experiments.hpp"
#include "finray/optics.hpp"
#include "finray/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace finray {

struct ImagingSettings {
    double threshold = 0.25;
    int min_blob_px = 20;
    int out_width = 240;
    int out_height = 135;
};

struct OpticsSettings {
    SceneOptions scene;
    int rays = 721;
};

/// Everything a run can read from a config file. A file may hold a single
/// design's fields at the top level, or a `designs` list of inline objects or
/// paths (relative to the file).
struct RunConfig {
    std::vector<FinRayDesign> designs;
    ProtocolSettings protocol;
    OpticsSettings optics;
    ImagingSettings imaging;
    std::string output_dir = "out";
    std::uint64_t seed = 42;
};

/// Throws ParseError (with line or key), UnknownKey, MissingRequired,
/// InvalidDesign, IoError.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".");
/// Fully resolved config, designs inline. parse_config_text(emit_config(c)) reproduces c.
std::string emit_config(const RunConfig& config);

FinRayDesign parse_design_text(const std::string& text);
std::string emit_design(const FinRayDesign& design);
/// Loads a design file; `baby` and `original` name the built-in presets.
FinRayDesign load_design(const std::string& path_or_preset);

// -----------------------------------------------------------------------------
// Scene files
// -----------------------------------------------------------------------------

/// Explicit scene (`camera`, `mirror`, `sensing`, `occluders`) or a run config
/// whose first design is turned into the nominal finger scene.
struct RaytraceConfig {
    OpticalScene scene;
    int rays = 721;
};
RaytraceConfig parse_raytrace_config(const std::filesystem::path& path);
RaytraceConfig parse_raytrace_text(const std::string& text, const std::filesystem::path& base_dir = ".");

struct SynthCase {
    std::string name;
    SyntheticScene scene;
};

/// Pipeline settings plus one or more presses (`cases`, or scene fields at the
/// top level). Cases without a `seed` take `default_seed`.
struct SynthConfig {
    PipelineSettings pipeline;
    std::vector<SynthCase> cases;
};
SynthConfig parse_synth_config(const std::filesystem::path& path, std::uint64_t default_seed);
SynthConfig parse_synth_text(const std::string& text, std::uint64_t default_seed);
std::string emit_synth_config(const SynthConfig& config);

}  // namespace finray
