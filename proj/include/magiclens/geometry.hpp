#pragma once

// Coordinate frames, rigid transforms, pinhole cameras and the physical
// display model.
//
// Conventions used everywhere in the library:
//   * lengths are millimeters, image coordinates are pixels;
//   * display frame: origin at the panel center, +x to the user's right,
//     +y up, +z out of the screen toward the user;
//   * camera frame: +z along the optical axis, +x image right, +y image down;
//   * pixel coordinates are continuous, (0, 0) is the top-left corner of the
//     image or panel and (width_px, height_px) the bottom-right corner.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace magiclens {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

/// Thrown when a viewpoint or ray configuration has no meaningful answer
/// (eye behind the panel, point behind a camera, edge-on planes).
class DegenerateGeometry : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by constructors when an argument violates a type invariant.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kOrthonormalTol = 1e-9;
inline constexpr double kParallelTol = 1e-12;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// ---------------------------------------------------------------------------

/// Proper rigid motion p' = R p + t. The rotation is kept orthonormal with
/// determinant +1; composition re-orthonormalizes once drift exceeds 1e-9.
class RigidTransform {
public:
    RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
    RigidTransform(const Mat3& rotation, const Vec3& translation);

    static RigidTransform identity() { return {}; }
    static RigidTransform translation(const Vec3& t) { return {Mat3::Identity(), t}; }
    static RigidTransform rotation_x(double rad, const Vec3& t = Vec3::Zero());
    static RigidTransform rotation_y(double rad, const Vec3& t = Vec3::Zero());
    static RigidTransform rotation_z(double rad, const Vec3& t = Vec3::Zero());
    /// Normalizes q before converting.
    static RigidTransform from_quaternion(const Quat& q, const Vec3& t);

    const Mat3& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }
    Quat quaternion() const;

    Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
    Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }

    /// Largest absolute entry of R^T R - I.
    double orthonormality_error() const;

private:
    Mat3 rotation_;
    Vec3 translation_;
};

/// Result applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

bool approx_equal(const RigidTransform& a, const RigidTransform& b, double tol);

// ---------------------------------------------------------------------------

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
};

Ray transform(const RigidTransform& t, const Ray& ray);

/// Ray through two points; throws DegenerateGeometry if they coincide.
Ray ray_through(const Vec3& from, const Vec3& to);

// ---------------------------------------------------------------------------

/// Physical display panel. pose_world maps display-frame points to world.
class DisplayModel {
public:
    DisplayModel(double width_mm, double height_mm, int width_px, int height_px,
                 RigidTransform pose_world = {});

    double width_mm() const { return width_mm_; }
    double height_mm() const { return height_mm_; }
    int width_px() const { return width_px_; }
    int height_px() const { return height_px_; }
    const RigidTransform& pose_world() const { return pose_world_; }

    DisplayModel with_pose(const RigidTransform& pose) const;

    /// Physical location (display frame, z = 0) of a pixel coordinate.
    Vec3 physical_point(const Vec2& px) const;
    /// Inverse of physical_point for points on the panel plane (z ignored).
    Vec2 pixel_of(const Vec3& point_display) const;
    bool contains_px(const Vec2& px) const;

    /// Panel corners in the display frame, order: top-left, top-right,
    /// bottom-right, bottom-left (matching pixel corners (0,0),(W,0),(W,H),(0,H)).
    std::array<Vec3, 4> corners() const;
    std::array<Vec2, 4> corner_pixels() const;

private:
    double width_mm_;
    double height_mm_;
    int width_px_;
    int height_px_;
    RigidTransform pose_world_;
};

// ---------------------------------------------------------------------------

enum class CameraFacing { front, back };

struct CameraIntrinsics {
    double fx = 0, fy = 0;
    double cx = 0, cy = 0;
    int width_px = 0, height_px = 0;
};

/// Pinhole camera rigidly attached to the display.
/// extrinsic maps display-frame points into the camera frame.
class PinholeCamera {
public:
    PinholeCamera(const CameraIntrinsics& k, RigidTransform extrinsic, CameraFacing facing);

    /// Camera whose optical center sits at position_display, looking along
    /// -z (back) or +z (front) of the display. The back camera's image x runs
    /// along display +x; the front camera sees the user mirrored.
    static PinholeCamera mounted(const CameraIntrinsics& k, const Vec3& position_display,
                                 CameraFacing facing);

    /// Intrinsics with fx = fy and the principal point at the image center.
    static CameraIntrinsics centered_intrinsics(int width_px, int height_px,
                                                double horizontal_fov_rad);

    const CameraIntrinsics& intrinsics() const { return k_; }
    double fx() const { return k_.fx; }
    double fy() const { return k_.fy; }
    double cx() const { return k_.cx; }
    double cy() const { return k_.cy; }
    int width_px() const { return k_.width_px; }
    int height_px() const { return k_.height_px; }
    const RigidTransform& extrinsic() const { return extrinsic_; }
    CameraFacing facing() const { return facing_; }

    /// Optical center in the display frame.
    Vec3 center_display() const;
    bool contains_px(const Vec2& px) const;

private:
    CameraIntrinsics k_;
    RigidTransform extrinsic_;
    CameraFacing facing_;
};

/// (fx x/z + cx, fy y/z + cy). Throws DegenerateGeometry when z <= 0.
Vec2 project_pinhole(const PinholeCamera& cam, const Vec3& point_cam);
/// Ray in the camera frame, origin at the optical center.
Ray unproject_ray(const PinholeCamera& cam, const Vec2& px);

// ---------------------------------------------------------------------------

/// Bounded plane with its own 2D frame: origin at point_world, axes u and
/// v = normal x u. Bounds are a width x height rectangle centered at the origin.
class ScenePlane {
public:
    ScenePlane(const Vec3& point_world, const Vec3& normal_world, const Vec3& u_axis_world,
               double width_mm, double height_mm);

    const Vec3& point_world() const { return point_; }
    const Vec3& normal_world() const { return normal_; }
    const Vec3& u_axis() const { return u_; }
    const Vec3& v_axis() const { return v_; }
    double width_mm() const { return width_mm_; }
    double height_mm() const { return height_mm_; }

    Vec2 to_plane(const Vec3& p_world) const;
    Vec3 to_world(const Vec2& p_plane) const;
    /// True if p lies inside the bounds shrunk by margin on every side.
    bool contains(const Vec2& p_plane, double margin = 0.0) const;
    double signed_distance(const Vec3& p_world) const;

    ScenePlane transformed(const RigidTransform& t) const;

private:
    Vec3 point_;
    Vec3 normal_;
    Vec3 u_;
    Vec3 v_;
    double width_mm_;
    double height_mm_;
};

/// Forward intersection; nullopt when the ray is parallel to the plane
/// (|d.n| < 1e-12) or the hit lies behind the origin. Bounds are not checked.
std::optional<Vec3> intersect_ray_plane(const Ray& ray, const ScenePlane& plane);

// ---------------------------------------------------------------------------

/// Near-plane window of a head-coupled frustum, in eye-relative mm.
struct FrustumExtents {
    double left, right, bottom, top, near_mm, far_mm;
};

FrustumExtents offaxis_extents(const Vec3& eye_display, const DisplayModel& display,
                               double near_mm, double far_mm);

/// Projection * view matrix (OpenGL clip conventions) for an eye at
/// eye_display looking through the panel. The panel corners land on the
/// (+-1, +-1) corners of normalized device coordinates.
/// Throws DegenerateGeometry when eye z <= 0, InvalidArgument on bad planes.
Mat4 offaxis_frustum(const Vec3& eye_display, const DisplayModel& display, double near_mm,
                     double far_mm);

/// Perspective divide of M * (p, 1); nullopt when clip w <= 0.
std::optional<Vec3> project_ndc(const Mat4& m, const Vec3& p);

/// NDC (x, y) to continuous display pixel coordinates.
Vec2 ndc_to_display_px(const Vec2& ndc, const DisplayModel& display);

// ---------------------------------------------------------------------------

/// Eye positions in the display frame. The cyclopean point is the midpoint.
class EyeState {
public:
    /// Eyes split symmetrically along the display x axis.
    static EyeState from_cyclopean(const Vec3& cyclopean_mm, double ipd_mm);
    static EyeState from_eyes(const Vec3& left_mm, const Vec3& right_mm);

    const Vec3& cyclopean() const { return cyclopean_; }
    const Vec3& left() const { return left_; }
    const Vec3& right() const { return right_; }
    double ipd_mm() const { return ipd_; }

    /// Both eyes moved by the same offset.
    EyeState displaced(const Vec3& offset) const;

private:
    EyeState(const Vec3& l, const Vec3& r);
    Vec3 cyclopean_;
    Vec3 left_;
    Vec3 right_;
    double ipd_;
};

}  // namespace magiclens
