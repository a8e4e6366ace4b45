#include "magiclens/geometry.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace magiclens {

namespace {

Mat3 nearest_rotation(const Mat3& m)
{
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
        Mat3 u = svd.matrixU();
        u.col(2) *= -1.0;
        r = u * svd.matrixV().transpose();
    }
    return r;
}

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation)
{
    if (!rotation.allFinite() || !translation.allFinite())
        throw InvalidArgument("RigidTransform: non-finite entries");
    const double err = orthonormality_error();
    if (err > 1e-6 || rotation.determinant() <= 0)
        throw InvalidArgument("RigidTransform: rotation is not a proper orthonormal matrix");
    if (err > kOrthonormalTol)
        rotation_ = nearest_rotation(rotation);
}

RigidTransform RigidTransform::rotation_x(double rad, const Vec3& t)
{
    return {Eigen::AngleAxisd(rad, Vec3::UnitX()).toRotationMatrix(), t};
}

RigidTransform RigidTransform::rotation_y(double rad, const Vec3& t)
{
    return {Eigen::AngleAxisd(rad, Vec3::UnitY()).toRotationMatrix(), t};
}

RigidTransform RigidTransform::rotation_z(double rad, const Vec3& t)
{
    return {Eigen::AngleAxisd(rad, Vec3::UnitZ()).toRotationMatrix(), t};
}

RigidTransform RigidTransform::from_quaternion(const Quat& q, const Vec3& t)
{
    const double n = q.norm();
    if (!(n > 0) || !std::isfinite(n))
        throw InvalidArgument("RigidTransform: zero or non-finite quaternion");
    return {q.normalized().toRotationMatrix(), t};
}

Quat RigidTransform::quaternion() const
{
    Quat q(rotation_);
    q.normalize();
    // Canonical hemisphere so that export is stable.
    if (q.w() < 0)
        q.coeffs() *= -1.0;
    return q;
}

double RigidTransform::orthonormality_error() const
{
    return max_abs(rotation_.transpose() * rotation_ - Mat3::Identity());
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b)
{
    return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

RigidTransform invert(const RigidTransform& t)
{
    const Mat3 rt = t.rotation().transpose();
    return {rt, -(rt * t.translation())};
}

bool approx_equal(const RigidTransform& a, const RigidTransform& b, double tol)
{
    return max_abs(a.rotation() - b.rotation()) <= tol &&
           (a.translation() - b.translation()).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------

Ray transform(const RigidTransform& t, const Ray& ray)
{
    return {t.apply(ray.origin), t.apply_direction(ray.direction)};
}

Ray ray_through(const Vec3& from, const Vec3& to)
{
    const Vec3 d = to - from;
    const double n = d.norm();
    if (!(n > 0))
        throw DegenerateGeometry("ray_through: coincident points");
    return {from, d / n};
}

// ---------------------------------------------------------------------------

DisplayModel::DisplayModel(double width_mm, double height_mm, int width_px, int height_px,
                           RigidTransform pose_world)
    : width_mm_(width_mm),
      height_mm_(height_mm),
      width_px_(width_px),
      height_px_(height_px),
      pose_world_(std::move(pose_world))
{
    if (!(width_mm > 0) || !(height_mm > 0) || width_px <= 0 || height_px <= 0)
        throw InvalidArgument("DisplayModel: sizes and resolution must be positive");
}

DisplayModel DisplayModel::with_pose(const RigidTransform& pose) const
{
    return {width_mm_, height_mm_, width_px_, height_px_, pose};
}

Vec3 DisplayModel::physical_point(const Vec2& px) const
{
    return {(px.x() / width_px_ - 0.5) * width_mm_, (0.5 - px.y() / height_px_) * height_mm_, 0.0};
}

Vec2 DisplayModel::pixel_of(const Vec3& p) const
{
    return {(p.x() / width_mm_ + 0.5) * width_px_, (0.5 - p.y() / height_mm_) * height_px_};
}

bool DisplayModel::contains_px(const Vec2& px) const
{
    return px.x() >= 0 && px.x() <= width_px_ && px.y() >= 0 && px.y() <= height_px_;
}

std::array<Vec3, 4> DisplayModel::corners() const
{
    const double hw = width_mm_ / 2, hh = height_mm_ / 2;
    return {Vec3{-hw, hh, 0}, Vec3{hw, hh, 0}, Vec3{hw, -hh, 0}, Vec3{-hw, -hh, 0}};
}

std::array<Vec2, 4> DisplayModel::corner_pixels() const
{
    const double w = width_px_, h = height_px_;
    return {Vec2{0, 0}, Vec2{w, 0}, Vec2{w, h}, Vec2{0, h}};
}

// ---------------------------------------------------------------------------

PinholeCamera::PinholeCamera(const CameraIntrinsics& k, RigidTransform extrinsic,
                             CameraFacing facing)
    : k_(k), extrinsic_(std::move(extrinsic)), facing_(facing)
{
    if (!(k.fx > 0) || !(k.fy > 0) || k.width_px <= 0 || k.height_px <= 0)
        throw InvalidArgument("PinholeCamera: focal lengths and image size must be positive");
    if (!std::isfinite(k.cx) || !std::isfinite(k.cy))
        throw InvalidArgument("PinholeCamera: principal point must be finite");
}

PinholeCamera PinholeCamera::mounted(const CameraIntrinsics& k, const Vec3& position_display,
                                     CameraFacing facing)
{
    // Rows are the camera axes expressed in the display frame.
    Mat3 r;
    if (facing == CameraFacing::back)
        r << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    else
        r << -1, 0, 0, 0, -1, 0, 0, 0, 1;
    return {k, RigidTransform(r, -(r * position_display)), facing};
}

CameraIntrinsics PinholeCamera::centered_intrinsics(int width_px, int height_px,
                                                    double horizontal_fov_rad)
{
    if (!(horizontal_fov_rad > 0) || !(horizontal_fov_rad < kPi))
        throw InvalidArgument("centered_intrinsics: field of view must be in (0, pi)");
    const double f = 0.5 * width_px / std::tan(horizontal_fov_rad / 2);
    return {f, f, width_px / 2.0, height_px / 2.0, width_px, height_px};
}

Vec3 PinholeCamera::center_display() const { return invert(extrinsic_).translation(); }

bool PinholeCamera::contains_px(const Vec2& px) const
{
    return px.x() >= 0 && px.x() <= k_.width_px && px.y() >= 0 && px.y() <= k_.height_px;
}

Vec2 project_pinhole(const PinholeCamera& cam, const Vec3& p)
{
    if (!(p.z() > 0))
        throw DegenerateGeometry("project_pinhole: point is behind the camera");
    return {cam.fx() * p.x() / p.z() + cam.cx(), cam.fy() * p.y() / p.z() + cam.cy()};
}

Ray unproject_ray(const PinholeCamera& cam, const Vec2& px)
{
    const Vec3 d((px.x() - cam.cx()) / cam.fx(), (px.y() - cam.cy()) / cam.fy(), 1.0);
    return {Vec3::Zero(), d.normalized()};
}

// ---------------------------------------------------------------------------

ScenePlane::ScenePlane(const Vec3& point_world, const Vec3& normal_world,
                       const Vec3& u_axis_world, double width_mm, double height_mm)
    : point_(point_world), width_mm_(width_mm), height_mm_(height_mm)
{
    const double nn = normal_world.norm();
    if (!(nn > 0) || !std::isfinite(nn))
        throw InvalidArgument("ScenePlane: normal must be non-zero");
    normal_ = normal_world / nn;
    // Project u into the plane so callers may pass an approximate axis.
    Vec3 u = u_axis_world - u_axis_world.dot(normal_) * normal_;
    if (!(u.norm() > 1e-9))
        throw InvalidArgument("ScenePlane: u axis is parallel to the normal");
    u_ = u.normalized();
    v_ = normal_.cross(u_);
    if (!(width_mm > 0) || !(height_mm > 0))
        throw InvalidArgument("ScenePlane: bounds must be positive");
}

Vec2 ScenePlane::to_plane(const Vec3& p) const
{
    const Vec3 d = p - point_;
    return {d.dot(u_), d.dot(v_)};
}

Vec3 ScenePlane::to_world(const Vec2& q) const { return point_ + q.x() * u_ + q.y() * v_; }

bool ScenePlane::contains(const Vec2& q, double margin) const
{
    return std::abs(q.x()) <= width_mm_ / 2 - margin && std::abs(q.y()) <= height_mm_ / 2 - margin;
}

double ScenePlane::signed_distance(const Vec3& p) const { return (p - point_).dot(normal_); }

ScenePlane ScenePlane::transformed(const RigidTransform& t) const
{
    return {t.apply(point_), t.apply_direction(normal_), t.apply_direction(u_), width_mm_,
            height_mm_};
}

std::optional<Vec3> intersect_ray_plane(const Ray& ray, const ScenePlane& plane)
{
    const double denom = ray.direction.dot(plane.normal_world());
    if (std::abs(denom) < kParallelTol)
        return std::nullopt;
    const double t = (plane.point_world() - ray.origin).dot(plane.normal_world()) / denom;
    if (t < 0)
        return std::nullopt;
    return ray.origin + t * ray.direction;
}

// ---------------------------------------------------------------------------

FrustumExtents offaxis_extents(const Vec3& eye, const DisplayModel& display, double near_mm,
                               double far_mm)
{
    if (!(eye.z() > 0))
        throw DegenerateGeometry("offaxis_frustum: eye must be in front of the panel (z > 0)");
    if (!(near_mm > 0) || !(far_mm > near_mm))
        throw InvalidArgument("offaxis_frustum: require 0 < near < far");
    const double s = near_mm / eye.z();
    const double hw = display.width_mm() / 2, hh = display.height_mm() / 2;
    return {(-hw - eye.x()) * s, (hw - eye.x()) * s, (-hh - eye.y()) * s, (hh - eye.y()) * s,
            near_mm, far_mm};
}

Mat4 offaxis_frustum(const Vec3& eye, const DisplayModel& display, double near_mm,
                     double far_mm)
{
    const FrustumExtents e = offaxis_extents(eye, display, near_mm, far_mm);
    const double n = e.near_mm, f = e.far_mm;
    Mat4 proj = Mat4::Zero();
    proj(0, 0) = 2 * n / (e.right - e.left);
    proj(0, 2) = (e.right + e.left) / (e.right - e.left);
    proj(1, 1) = 2 * n / (e.top - e.bottom);
    proj(1, 2) = (e.top + e.bottom) / (e.top - e.bottom);
    proj(2, 2) = -(f + n) / (f - n);
    proj(2, 3) = -2 * f * n / (f - n);
    proj(3, 2) = -1;

    // Display axes are already the viewing axes; only the eye offset remains.
    Mat4 view = Mat4::Identity();
    view.block<3, 1>(0, 3) = -eye;
    return proj * view;
}

std::optional<Vec3> project_ndc(const Mat4& m, const Vec3& p)
{
    const Eigen::Vector4d c = m * p.homogeneous();
    if (!(c.w() > 0))
        return std::nullopt;
    return c.head<3>() / c.w();
}

Vec2 ndc_to_display_px(const Vec2& ndc, const DisplayModel& display)
{
    return {(ndc.x() + 1) / 2 * display.width_px(), (1 - ndc.y()) / 2 * display.height_px()};
}

// ---------------------------------------------------------------------------

EyeState::EyeState(const Vec3& l, const Vec3& r)
    : cyclopean_((l + r) / 2), left_(l), right_(r), ipd_((l - r).norm())
{
    if (!l.allFinite() || !r.allFinite())
        throw InvalidArgument("EyeState: non-finite eye position");
    if (!(cyclopean_.z() > 0))
        throw InvalidArgument("EyeState: eyes must be in front of the display (z > 0)");
}

EyeState EyeState::from_cyclopean(const Vec3& c, double ipd_mm)
{
    if (!(ipd_mm >= 0))
        throw InvalidArgument("EyeState: ipd must be non-negative");
    const Vec3 half(ipd_mm / 2, 0, 0);
    EyeState e(c - half, c + half);
    // Keep the exact inputs rather than the recomputed midpoint/ipd.
    e.cyclopean_ = c;
    e.ipd_ = ipd_mm;
    return e;
}

EyeState EyeState::from_eyes(const Vec3& left_mm, const Vec3& right_mm)
{
    return {left_mm, right_mm};
}

EyeState EyeState::displaced(const Vec3& offset) const
{
    EyeState e(left_ + offset, right_ + offset);
    e.cyclopean_ = cyclopean_ + offset;
    e.ipd_ = ipd_;
    return e;
}

}  // namespace magiclens
