#pragma once

// Per-mode view generation: where a world point is drawn on the handheld
// display, and where the user perceives a drawn pixel on the scene surface.

#include "magiclens/geometry.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace magiclens {

enum class RenderMode { DPR, UPR, FUPR, AAUPR };

std::string_view to_string(RenderMode m);
/// Accepts the canonical upper-case names; throws InvalidArgument otherwise.
RenderMode parse_render_mode(std::string_view s);

/// One-time head-to-device measurement for fixed point-of-view rendering.
struct FuprCalibration {
    double distance_mm = 150.0;
    double ipd_mm = 63.0;
};

/// Eye on the perpendicular through the panel center, never updated.
EyeState fupr_eye(const FuprCalibration& cal);

/// Display pixel -> scene-plane 2D coordinates (mm), up to scale.
struct Homography {
    Mat3 h;

    Vec2 apply(const Vec2& p) const;
    Homography normalized() const;  // scaled so that h(2,2) = 1 (or max |h| = 1)
};

/// Central projection of the panel onto the plane from the cyclopean eye.
/// Throws DegenerateGeometry if any panel-corner ray misses the plane or
/// the eye lies on the plane.
Homography upr_display_to_plane(const EyeState& eye, const DisplayModel& display,
                                const ScenePlane& plane);

enum class FitPolicy { stretch, letterbox };

std::string_view to_string(FitPolicy f);
FitPolicy parse_fit_policy(std::string_view s);

/// Video see-through mapping: display pixel -> back-camera pixel -> ray ->
/// scene plane.
class DprMapping {
public:
    DprMapping(PinholeCamera back_cam, DisplayModel display, ScenePlane plane, FitPolicy fit);

    Vec2 display_to_camera_px(const Vec2& display_px) const;
    Vec2 camera_to_display_px(const Vec2& camera_px) const;
    /// nullopt if the camera ray misses the plane.
    std::optional<Vec2> map(const Vec2& display_px) const;

    const PinholeCamera& camera() const { return cam_; }
    const DisplayModel& display() const { return display_; }
    FitPolicy fit() const { return fit_; }

    /// Camera pixels per display pixel along x and y.
    Vec2 scale() const { return scale_; }

private:
    PinholeCamera cam_;
    DisplayModel display_;
    ScenePlane plane_;
    FitPolicy fit_;
    Vec2 scale_;
    Vec2 offset_;
    RigidTransform camera_to_world_;
};

DprMapping dpr_display_to_plane(const PinholeCamera& back_cam, const DisplayModel& display,
                                const ScenePlane& plane, FitPolicy fit = FitPolicy::stretch);

/// Where the true cyclopean eye sees display_px land on the plane.
std::optional<Vec2> perceived_plane_point(const Vec2& display_px, const EyeState& true_eye,
                                          const DisplayModel& display, const ScenePlane& plane);

/// Everything about the physical setup that view generation needs.
struct ViewRig {
    DisplayModel display;   // pose_world is the current device pose
    PinholeCamera back_cam;
    ScenePlane plane;
    FitPolicy fit = FitPolicy::stretch;
};

/// Clip planes used when drawing through the head-coupled frustum.
inline constexpr double kDrawNearMm = 1.0;
inline constexpr double kDrawFarMm = 1.0e6;

/// Display pixel at which a mode draws target_world. eye is the rendering
/// viewpoint for UPR/AAUPR (estimate) and FUPR (calibration eye); DPR
/// ignores it. nullopt when the target cannot be drawn (behind the eye or
/// the back camera).
std::optional<Vec2> draw_position(RenderMode mode, const Vec3& target_world, const EyeState& eye,
                                  const ViewRig& rig);

/// Plane distance (mm) between the target and where the user perceives it.
std::optional<double> pointing_error(RenderMode mode, const Vec3& target_world,
                                     const EyeState& estimated_eye, const EyeState& true_eye,
                                     const ViewRig& rig);

/// Plane-mm error to screen pixels for a monitor with the given pixel density.
double error_mm_to_px(double error_mm, double px_per_mm);

}  // namespace magiclens
