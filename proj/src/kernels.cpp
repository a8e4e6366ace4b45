#include "magiclens/kernels.hpp"

#include <cmath>
#include <exception>
#include <limits>

namespace magiclens::kernels {

namespace {

double one_error(const PointingCase& c)
{
    const auto e = pointing_error(c.mode, c.target_world, c.estimated_eye, c.true_eye, c.rig);
    return e ? *e : std::numeric_limits<double>::quiet_NaN();
}

// Exceptions may not cross an OpenMP region; collect the first one by index.
template <class Fn>
void parallel_for(std::ptrdiff_t n, Fn&& fn)
{
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace

std::vector<double> pointing_errors_serial(std::span<const PointingCase> cases)
{
    std::vector<double> out(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i)
        out[i] = one_error(cases[i]);
    return out;
}

std::vector<double> pointing_errors_parallel(std::span<const PointingCase> cases)
{
    std::vector<double> out(cases.size());
    parallel_for(static_cast<std::ptrdiff_t>(cases.size()),
                 [&](std::ptrdiff_t i) { out[i] = one_error(cases[i]); });
    return out;
}

double homography_deviation(const HomographyCase& c, int grid)
{
    Homography h;
    try {
        h = upr_display_to_plane(c.eye, c.display, c.plane);
    } catch (const DegenerateGeometry&) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0.0;
    for (int j = 0; j < grid; ++j) {
        for (int i = 0; i < grid; ++i) {
            const double fx = grid > 1 ? static_cast<double>(i) / (grid - 1) : 0.5;
            const double fy = grid > 1 ? static_cast<double>(j) / (grid - 1) : 0.5;
            const Vec2 px(fx * c.display.width_px(), fy * c.display.height_px());
            const auto cast = perceived_plane_point(px, c.eye, c.display, c.plane);
            if (!cast)
                return std::numeric_limits<double>::infinity();
            worst = std::max(worst, (h.apply(px) - *cast).norm());
        }
    }
    return worst;
}

std::vector<double> homography_deviations_serial(std::span<const HomographyCase> cases, int grid)
{
    std::vector<double> out(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i)
        out[i] = homography_deviation(cases[i], grid);
    return out;
}

std::vector<double> homography_deviations_parallel(std::span<const HomographyCase> cases, int grid)
{
    std::vector<double> out(cases.size());
    parallel_for(static_cast<std::ptrdiff_t>(cases.size()),
                 [&](std::ptrdiff_t i) { out[i] = homography_deviation(cases[i], grid); });
    return out;
}

std::vector<RunResult> run_cells_serial(std::span<const ExperimentConfig> cells)
{
    std::vector<RunResult> out;
    out.reserve(cells.size());
    for (const auto& c : cells)
        out.push_back(run(c));
    return out;
}

std::vector<RunResult> run_cells_parallel(std::span<const ExperimentConfig> cells)
{
    std::vector<RunResult> out(cells.size());
    parallel_for(static_cast<std::ptrdiff_t>(cells.size()),
                 [&](std::ptrdiff_t i) { out[i] = run(cells[i]); });
    return out;
}

}  // namespace magiclens::kernels
