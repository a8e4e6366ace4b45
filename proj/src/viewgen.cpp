#include "magiclens/viewgen.hpp"

#include <algorithm>
#include <cmath>

namespace magiclens {

std::string_view to_string(RenderMode m)
{
    switch (m) {
    case RenderMode::DPR: return "DPR";
    case RenderMode::UPR: return "UPR";
    case RenderMode::FUPR: return "FUPR";
    case RenderMode::AAUPR: return "AAUPR";
    }
    return "?";
}

RenderMode parse_render_mode(std::string_view s)
{
    for (RenderMode m : {RenderMode::DPR, RenderMode::UPR, RenderMode::FUPR, RenderMode::AAUPR})
        if (s == to_string(m))
            return m;
    throw InvalidArgument("unknown render mode '" + std::string(s) + "'");
}

std::string_view to_string(FitPolicy f) { return f == FitPolicy::stretch ? "stretch" : "letterbox"; }

FitPolicy parse_fit_policy(std::string_view s)
{
    if (s == "stretch")
        return FitPolicy::stretch;
    if (s == "letterbox")
        return FitPolicy::letterbox;
    throw InvalidArgument("unknown fit policy '" + std::string(s) + "'");
}

EyeState fupr_eye(const FuprCalibration& cal)
{
    if (!(cal.distance_mm > 0))
        throw InvalidArgument("FuprCalibration: distance must be positive");
    return EyeState::from_cyclopean({0, 0, cal.distance_mm}, cal.ipd_mm);
}

// ---------------------------------------------------------------------------

Vec2 Homography::apply(const Vec2& p) const
{
    const Vec3 q = h * p.homogeneous();
    return q.hnormalized();
}

Homography Homography::normalized() const
{
    if (std::abs(h(2, 2)) > 1e-12)
        return {h / h(2, 2)};
    return {h / h.cwiseAbs().maxCoeff()};
}

Homography upr_display_to_plane(const EyeState& eye, const DisplayModel& display,
                                const ScenePlane& plane)
{
    if (!(eye.cyclopean().z() > 0))
        throw DegenerateGeometry("upr_display_to_plane: eye behind the panel");
    const RigidTransform& pose = display.pose_world();
    const Vec3 e = pose.apply(eye.cyclopean());
    const Vec3& n = plane.normal_world();
    const Vec3& p0 = plane.point_world();

    const double eye_side = n.dot(p0 - e);
    if (std::abs(eye_side) < 1e-9)
        throw DegenerateGeometry("upr_display_to_plane: eye lies on the scene plane");

    // X(u, v) - e = D (u, v, 1): panel point relative to the eye, affine in pixels.
    Mat3 d;
    d.col(0) = pose.apply_direction({display.width_mm() / display.width_px(), 0, 0});
    d.col(1) = pose.apply_direction({0, -display.height_mm() / display.height_px(), 0});
    d.col(2) = pose.apply({-display.width_mm() / 2, display.height_mm() / 2, 0}) - e;

    for (const Vec2& c : display.corner_pixels()) {
        const double along = n.dot(d * c.homogeneous());
        // Forward hit needs lambda = eye_side / along > 0.
        if (std::abs(along) < kParallelTol || eye_side / along <= 0)
            throw DegenerateGeometry("upr_display_to_plane: a panel corner ray misses the plane");
    }

    // Plane coordinates of e + lambda q, multiplied through by n.q.
    const Vec3 rel = e - p0;
    Mat3 m;
    m.row(0) = rel.dot(plane.u_axis()) * n.transpose() + eye_side * plane.u_axis().transpose();
    m.row(1) = rel.dot(plane.v_axis()) * n.transpose() + eye_side * plane.v_axis().transpose();
    m.row(2) = n.transpose();
    return {m * d};
}

// ---------------------------------------------------------------------------

DprMapping::DprMapping(PinholeCamera back_cam, DisplayModel display, ScenePlane plane,
                       FitPolicy fit)
    : cam_(std::move(back_cam)),
      display_(std::move(display)),
      plane_(std::move(plane)),
      fit_(fit),
      camera_to_world_(compose(display_.pose_world(), invert(cam_.extrinsic())))
{
    const double sx = static_cast<double>(cam_.width_px()) / display_.width_px();
    const double sy = static_cast<double>(cam_.height_px()) / display_.height_px();
    if (fit == FitPolicy::stretch) {
        scale_ = {sx, sy};
        offset_ = Vec2::Zero();
    } else {
        // Whole camera image visible, centered, bars on the short side.
        const double s = std::max(sx, sy);
        scale_ = {s, s};
        offset_ = Vec2(cam_.width_px() / 2.0 - s * display_.width_px() / 2.0,
                       cam_.height_px() / 2.0 - s * display_.height_px() / 2.0);
    }
}

Vec2 DprMapping::display_to_camera_px(const Vec2& p) const
{
    return p.cwiseProduct(scale_) + offset_;
}

Vec2 DprMapping::camera_to_display_px(const Vec2& p) const
{
    return (p - offset_).cwiseQuotient(scale_);
}

std::optional<Vec2> DprMapping::map(const Vec2& display_px) const
{
    const Ray r = transform(camera_to_world_, unproject_ray(cam_, display_to_camera_px(display_px)));
    const auto hit = intersect_ray_plane(r, plane_);
    if (!hit)
        return std::nullopt;
    return plane_.to_plane(*hit);
}

DprMapping dpr_display_to_plane(const PinholeCamera& back_cam, const DisplayModel& display,
                                const ScenePlane& plane, FitPolicy fit)
{
    return {back_cam, display, plane, fit};
}

// ---------------------------------------------------------------------------

std::optional<Vec2> perceived_plane_point(const Vec2& display_px, const EyeState& true_eye,
                                          const DisplayModel& display, const ScenePlane& plane)
{
    const RigidTransform& pose = display.pose_world();
    const Vec3 eye = pose.apply(true_eye.cyclopean());
    const Vec3 through = pose.apply(display.physical_point(display_px));
    const auto hit = intersect_ray_plane(ray_through(eye, through), plane);
    if (!hit)
        return std::nullopt;
    return plane.to_plane(*hit);
}

std::optional<Vec2> draw_position(RenderMode mode, const Vec3& target_world, const EyeState& eye,
                                  const ViewRig& rig)
{
    const RigidTransform world_to_display = invert(rig.display.pose_world());
    const Vec3 target = world_to_display.apply(target_world);
    if (mode == RenderMode::DPR) {
        const Vec3 in_cam = rig.back_cam.extrinsic().apply(target);
        if (!(in_cam.z() > 0))
            return std::nullopt;
        const Vec2 cam_px = project_pinhole(rig.back_cam, in_cam);
        return DprMapping(rig.back_cam, rig.display, rig.plane, rig.fit).camera_to_display_px(cam_px);
    }
    const Mat4 m = offaxis_frustum(eye.cyclopean(), rig.display, kDrawNearMm, kDrawFarMm);
    const auto ndc = project_ndc(m, target);
    if (!ndc)
        return std::nullopt;
    return ndc_to_display_px(ndc->head<2>(), rig.display);
}

std::optional<double> pointing_error(RenderMode mode, const Vec3& target_world,
                                     const EyeState& estimated_eye, const EyeState& true_eye,
                                     const ViewRig& rig)
{
    const auto drawn = draw_position(mode, target_world, estimated_eye, rig);
    if (!drawn)
        return std::nullopt;
    const auto perceived = perceived_plane_point(*drawn, true_eye, rig.display, rig.plane);
    if (!perceived)
        return std::nullopt;
    return (*perceived - rig.plane.to_plane(target_world)).norm();
}

double error_mm_to_px(double error_mm, double px_per_mm)
{
    if (!(px_per_mm > 0))
        throw InvalidArgument("error_mm_to_px: pixel density must be positive");
    return error_mm * px_per_mm;
}

}  // namespace magiclens
