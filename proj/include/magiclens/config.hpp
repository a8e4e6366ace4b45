#pragma once

// Flat "key = value" configuration files. '#' starts a comment, blank lines
// are ignored, unknown and repeated keys are errors. Vectors are comma
// separated ("x, y, z"). The full key list is in README.md.

#include "magiclens/harness.hpp"
#include "magiclens/tracksim.hpp"

#include <filesystem>
#include <string_view>

namespace magiclens {

/// argument base_dir resolves a relative trace.file.
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Trace spec files use the trace.* keys of the experiment config, with or
/// without the "trace." prefix.
TraceSpec parse_trace_spec(std::string_view text);
TraceSpec load_trace_spec(const std::filesystem::path& path);

}  // namespace magiclens
