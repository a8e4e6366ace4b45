#pragma once

// Seeded random rigs shared by the kernel tests, the acceptance binary and
// the benchmarks.

#include "magiclens/kernels.hpp"

#include "oracles.hpp"

#include <array>
#include <random>
#include <vector>

namespace sample {

using namespace magiclens;

inline DisplayModel panel(const RigidTransform& pose = {}) { return DisplayModel(109, 61, 1920, 1080, pose); }

/// Device 120-400 mm above a tilted plane through the origin, rotated up
/// to max_angle, eye 150-600 mm in front of the panel.
inline kernels::HomographyCase homography_case(std::mt19937_64& rng, double max_angle = 0.5)
{
    std::uniform_real_distribution<double> xy(-120, 120), dz(120, 400), ez(150, 600), tilt(-0.3, 0.3);
    const RigidTransform pose(oracle::random_rotation(rng, max_angle), Vec3(xy(rng), xy(rng), dz(rng)));
    const Vec3 n = Vec3(tilt(rng), tilt(rng), 1).normalized();
    const ScenePlane plane(Vec3(xy(rng) * 0.5, xy(rng) * 0.5, 0), n, Vec3(1, 0, 0), 800, 600);
    const auto eye = EyeState::from_cyclopean(Vec3(xy(rng), xy(rng), ez(rng)), 63);
    return {eye, panel(pose), plane};
}

/// Oracle test for the degenerate case: some panel-corner ray from the eye
/// fails to meet the plane in front of it.
inline bool corner_ray_misses(const kernels::HomographyCase& c)
{
    const auto& d = c.display;
    const oracle::M3 R = d.pose_world().rotation();
    const oracle::V3 t = d.pose_world().translation();
    const oracle::V3 eye = R * c.eye.cyclopean() + t;
    const std::array<std::array<double, 2>, 4> corners{
        {{0.0, 0.0}, {double(d.width_px()), 0.0}, {0.0, double(d.height_px())},
         {double(d.width_px()), double(d.height_px())}}};
    for (const auto& k : corners) {
        const auto q = oracle::pixel_world(k[0], k[1], d.width_mm(), d.height_mm(), d.width_px(),
                                           d.height_px(), R, t);
        const auto h = oracle::hit_t(eye, q - eye, c.plane.point_world(), c.plane.normal_world());
        if (!h || *h <= 0)
            return true;
    }
    return false;
}

inline std::vector<kernels::HomographyCase> homography_cases(std::uint64_t seed, int n, bool skip_degenerate)
{
    std::mt19937_64 rng(seed);
    std::vector<kernels::HomographyCase> out;
    while (static_cast<int>(out.size()) < n) {
        auto c = homography_case(rng);
        if (skip_degenerate && corner_ray_misses(c))
            continue;
        out.push_back(c);
    }
    return out;
}

/// One rig per case; the estimated eye is the true eye plus Gaussian noise
/// of sigma_mm.
inline std::vector<kernels::PointingCase> pointing_cases(std::uint64_t seed, int n, double sigma_mm)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xy(-80, 80), dz(150, 400), ez(150, 500), tx(-200, 200),
        ty(-120, 120), cam(-50, 50);
    std::normal_distribution<double> noise(0.0, sigma_mm);
    std::uniform_int_distribution<int> mode(0, 3);
    const CameraIntrinsics back_k{500, 500, 320, 240, 640, 480};
    std::vector<kernels::PointingCase> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const RigidTransform pose(oracle::random_rotation(rng, 0.3), Vec3(xy(rng), xy(rng), dz(rng)));
        const ScenePlane plane(Vec3::Zero(), Vec3(0, 0, 1), Vec3(1, 0, 0), 506, 287);
        const ViewRig rig{panel(pose), PinholeCamera::mounted(back_k, Vec3(cam(rng), cam(rng) * 0.5, 0),
                                                              CameraFacing::back),
                          plane, FitPolicy::stretch};
        const Vec3 e(xy(rng), xy(rng), ez(rng));
        const auto truth = EyeState::from_cyclopean(e, 63);
        const auto est = EyeState::from_cyclopean(e + Vec3(noise(rng), noise(rng), noise(rng)), 63);
        const Vec3 target = plane.to_world(Vec2(tx(rng), ty(rng)));
        out.push_back({rig, static_cast<RenderMode>(mode(rng)), target, est, truth});
    }
    return out;
}

}  // namespace sample
