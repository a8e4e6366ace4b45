#pragma once

// Batch kernels. Each has a serial reference and an OpenMP version; the two
// produce bit-identical output (independent cells, results stored by index).

#include "magiclens/harness.hpp"
#include "magiclens/viewgen.hpp"

#include <span>
#include <vector>

namespace magiclens::kernels {

struct PointingCase {
    ViewRig rig;
    RenderMode mode;
    Vec3 target_world;
    EyeState estimated_eye;
    EyeState true_eye;
};

/// NaN where a ray misses.
std::vector<double> pointing_errors_serial(std::span<const PointingCase> cases);
std::vector<double> pointing_errors_parallel(std::span<const PointingCase> cases);

struct HomographyCase {
    EyeState eye;
    DisplayModel display;
    ScenePlane plane;
};

/// Largest plane distance (mm) between the homography mapping and a
/// per-pixel ray cast on a grid x grid lattice of display pixels spanning
/// the whole panel. +inf if any ray misses or the mapping is degenerate.
double homography_deviation(const HomographyCase& c, int grid);
std::vector<double> homography_deviations_serial(std::span<const HomographyCase> cases, int grid);
std::vector<double> homography_deviations_parallel(std::span<const HomographyCase> cases, int grid);

std::vector<RunResult> run_cells_serial(std::span<const ExperimentConfig> cells);
std::vector<RunResult> run_cells_parallel(std::span<const ExperimentConfig> cells);

}  // namespace magiclens::kernels
