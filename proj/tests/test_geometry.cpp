#include "magiclens/geometry.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace magiclens;

namespace {

double max_abs_diff(const Mat3& a, const Mat3& b) { return (a - b).cwiseAbs().maxCoeff(); }

RigidTransform random_transform(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> t(-500, 500);
    return {oracle::random_rotation(rng, kPi), Vec3(t(rng), t(rng), t(rng))};
}

DisplayModel panel() { return DisplayModel(109, 61, 1920, 1080); }

}  // namespace

TEST_CASE("compose with identity returns the same transform")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto T = random_transform(rng);
        CHECK(approx_equal(compose(T, RigidTransform::identity()), T, 1e-12));
        CHECK(approx_equal(compose(RigidTransform::identity(), T), T, 1e-12));
    }
}

TEST_CASE("compose with inverse is identity within 1e-9")
{
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const auto T = random_transform(rng);
        const auto I = compose(T, invert(T));
        CHECK(max_abs_diff(I.rotation(), Mat3::Identity()) < 1e-9);
        CHECK(I.translation().cwiseAbs().maxCoeff() < 1e-9);
        CHECK(approx_equal(compose(invert(T), T), RigidTransform::identity(), 1e-9));
    }
}

TEST_CASE("two quarter turns about z make a half turn")
{
    const auto q = RigidTransform::rotation_z(deg_to_rad(90));
    const auto h = compose(q, q);
    CHECK(approx_equal(h, RigidTransform::rotation_z(deg_to_rad(180)), 1e-12));
    CHECK((h.apply(Vec3(1, 0, 0)) - Vec3(-1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("compose applies b first")
{
    const auto a = RigidTransform::translation(Vec3(10, 0, 0));
    const auto b = RigidTransform::rotation_z(deg_to_rad(90));
    const Vec3 p(1, 0, 0);
    CHECK((compose(a, b).apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
    CHECK((compose(a, b).apply(p) - Vec3(10, 1, 0)).norm() < 1e-12);
}

TEST_CASE("long composition chains stay orthonormal")
{
    std::mt19937_64 rng(13);
    RigidTransform acc;
    for (int i = 0; i < 10000; ++i)
        acc = compose(acc, RigidTransform(oracle::random_rotation(rng, 0.3), Vec3::Zero()));
    CHECK(acc.orthonormality_error() <= 1e-9);
    CHECK(acc.rotation().determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rigid transform rejects non-rotations")
{
    Mat3 reflect = Mat3::Identity();
    reflect(0, 0) = -1;
    CHECK_THROWS_AS(RigidTransform(reflect, Vec3::Zero()), InvalidArgument);
    CHECK_THROWS_AS(RigidTransform(2.0 * Mat3::Identity(), Vec3::Zero()), InvalidArgument);
    Mat3 nan = Mat3::Identity();
    nan(1, 1) = std::nan("");
    CHECK_THROWS_AS(RigidTransform(nan, Vec3::Zero()), InvalidArgument);
}

TEST_CASE("quaternion round trip")
{
    std::mt19937_64 rng(14);
    for (int i = 0; i < 50; ++i) {
        const auto T = random_transform(rng);
        const auto back = RigidTransform::from_quaternion(T.quaternion(), T.translation());
        CHECK(approx_equal(back, T, 1e-12));
        CHECK(T.quaternion().w() >= 0);
    }
}

TEST_CASE("transform of a ray keeps unit direction")
{
    std::mt19937_64 rng(15);
    const auto T = random_transform(rng);
    const Ray r = ray_through(Vec3(1, 2, 3), Vec3(4, -2, 9));
    const Ray tr = transform(T, r);
    CHECK(tr.direction.norm() == doctest::Approx(1.0));
    CHECK((tr.origin - T.apply(r.origin)).norm() < 1e-12);
    CHECK_THROWS_AS(ray_through(Vec3(1, 1, 1), Vec3(1, 1, 1)), DegenerateGeometry);
}

// ---------------------------------------------------------------------------

TEST_CASE("display pixel to physical point")
{
    const auto d = panel();
    CHECK((d.physical_point(Vec2(960, 540)) - Vec3::Zero()).norm() < 1e-12);
    CHECK((d.physical_point(Vec2(0, 0)) - Vec3(-54.5, 30.5, 0)).norm() < 1e-12);
    CHECK((d.physical_point(Vec2(1920, 1080)) - Vec3(54.5, -30.5, 0)).norm() < 1e-12);
    const Vec2 px(123.25, 987.5);
    CHECK((d.pixel_of(d.physical_point(px)) - px).norm() < 1e-9);
    const auto c = d.corners();
    const auto cp = d.corner_pixels();
    for (int i = 0; i < 4; ++i)
        CHECK((d.physical_point(cp[i]) - c[i]).norm() < 1e-12);
    CHECK(d.contains_px(Vec2(0, 0)));
    CHECK_FALSE(d.contains_px(Vec2(-0.1, 5)));
}

TEST_CASE("display rejects non-positive sizes")
{
    CHECK_THROWS_AS(DisplayModel(0, 61, 1920, 1080), InvalidArgument);
    CHECK_THROWS_AS(DisplayModel(109, -1, 1920, 1080), InvalidArgument);
    CHECK_THROWS_AS(DisplayModel(109, 61, 0, 1080), InvalidArgument);
    CHECK_THROWS_AS(DisplayModel(109, 61, 1920, -5), InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST_CASE("pinhole projection examples")
{
    const CameraIntrinsics k{500, 480, 320, 240, 640, 480};
    const auto cam = PinholeCamera::mounted(k, Vec3::Zero(), CameraFacing::back);
    CHECK((project_pinhole(cam, Vec3(0, 0, 700)) - Vec2(320, 240)).norm() < 1e-12);
    const double z = 400;
    CHECK((project_pinhole(cam, Vec3(z / 500, 0, z)) - Vec2(321, 240)).norm() < 1e-12);
    CHECK_THROWS_AS(project_pinhole(cam, Vec3(1, 1, 0)), DegenerateGeometry);
    CHECK_THROWS_AS(project_pinhole(cam, Vec3(1, 1, -3)), DegenerateGeometry);
}

TEST_CASE("camera rejects bad intrinsics")
{
    CHECK_THROWS_AS(PinholeCamera::mounted({0, 500, 320, 240, 640, 480}, Vec3::Zero(), CameraFacing::back),
                    InvalidArgument);
    CHECK_THROWS_AS(PinholeCamera::mounted({500, 500, 320, 240, 1000, 0}, Vec3::Zero(), CameraFacing::front),
                    InvalidArgument);
}

TEST_CASE("unproject of the principal point is the optical axis")
{
    const auto cam = PinholeCamera::mounted({500, 500, 300, 200, 640, 480}, Vec3::Zero(), CameraFacing::back);
    const Ray r = unproject_ray(cam, Vec2(300, 200));
    CHECK((r.direction - Vec3(0, 0, 1)).norm() < 1e-15);
    CHECK(r.origin.norm() == 0.0);
}

TEST_CASE("project and unproject are inverse on a pixel grid")
{
    const auto cam = PinholeCamera::mounted({512, 498, 317.5, 241.25, 640, 480}, Vec3::Zero(),
                                            CameraFacing::back);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const Vec2 px(-100 + 210.0 * i, -50 + 145.0 * j);
            const Ray r = unproject_ray(cam, px);
            for (double t : {0.5, 10.0, 1234.0})
                CHECK((project_pinhole(cam, r.origin + t * r.direction) - px).norm() < 1e-9);
        }
}

TEST_CASE("oblique unprojection matches independent normalization")
{
    const CameraIntrinsics k{600, 550, 330, 250, 640, 480};
    const auto cam = PinholeCamera::mounted(k, Vec3::Zero(), CameraFacing::front);
    const Vec2 px(17.0, 455.0);
    const oracle::V3 expected =
        oracle::V3((px.x() - k.cx) / k.fx, (px.y() - k.cy) / k.fy, 1.0).normalized();
    CHECK((unproject_ray(cam, px).direction - expected).norm() < 1e-15);
}

TEST_CASE("mounted cameras face away from and toward the user")
{
    const CameraIntrinsics k{500, 500, 320, 240, 640, 480};
    const auto back = PinholeCamera::mounted(k, Vec3(-40, 20, 0), CameraFacing::back);
    const auto front = PinholeCamera::mounted(k, Vec3(0, 36, 0), CameraFacing::front);
    CHECK((back.center_display() - Vec3(-40, 20, 0)).norm() < 1e-12);
    CHECK((front.center_display() - Vec3(0, 36, 0)).norm() < 1e-12);
    // A point behind the panel is in front of the back camera only.
    const Vec3 behind(-40, 20, -100), infront(0, 36, 300);
    CHECK(back.extrinsic().apply(behind).z() > 0);
    CHECK(front.extrinsic().apply(infront).z() > 0);
    // Back camera image x follows display +x; image y follows display -y.
    const Vec2 a = project_pinhole(back, back.extrinsic().apply(Vec3(-30, 20, -100)));
    const Vec2 b = project_pinhole(back, back.extrinsic().apply(Vec3(-40, 30, -100)));
    CHECK(a.x() > 320);
    CHECK(b.y() < 240);
}

// ---------------------------------------------------------------------------

TEST_CASE("axis ray onto a perpendicular plane")
{
    const ScenePlane plane(Vec3(0, 0, -250), Vec3(0, 0, 1), Vec3(1, 0, 0), 500, 300);
    const auto hit = intersect_ray_plane({Vec3::Zero(), Vec3(0, 0, -1)}, plane);
    REQUIRE(hit);
    CHECK(hit->norm() == doctest::Approx(250.0));
}

TEST_CASE("ray parallel to plane or pointing away has no hit")
{
    const ScenePlane plane(Vec3(0, 0, -250), Vec3(0, 0, 1), Vec3(1, 0, 0), 500, 300);
    CHECK_FALSE(intersect_ray_plane({Vec3::Zero(), Vec3(1, 0, 0)}, plane));
    CHECK_FALSE(intersect_ray_plane({Vec3::Zero(), Vec3(0, 0, 1)}, plane));
}

TEST_CASE("45 degree ray onto an offset plane satisfies the plane equation")
{
    const Vec3 p0(10, -20, 30), n = Vec3(1, 2, 2).normalized();
    const ScenePlane plane(p0, n, Vec3(2, -1, 0), 400, 400);
    const Vec3 o(0, 0, 100);
    const Vec3 d = (Vec3(0, 0, -1) + Vec3(1, 0, 0)).normalized();
    const auto hit = intersect_ray_plane({o, d}, plane);
    REQUIRE(hit);
    CHECK(std::abs((*hit - p0).dot(n)) < 1e-6);
    const auto t = oracle::hit_t(o, d, p0, n);
    REQUIRE(t);
    CHECK((*hit - (o + *t * d)).norm() < 1e-9);
}

TEST_CASE("ray-plane intersection is frame independent")
{
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> u(-200, 200);
    int hits = 0;
    for (int i = 0; i < 300; ++i) {
        const ScenePlane plane(Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)),
                               Vec3(u(rng), u(rng), u(rng)), 300, 200);
        const Ray ray = ray_through(Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)));
        const auto T = random_transform(rng);
        const auto a = intersect_ray_plane(ray, plane);
        const auto b = intersect_ray_plane(transform(T, ray), plane.transformed(T));
        REQUIRE(a.has_value() == b.has_value());
        if (a) {
            ++hits;
            CHECK((T.apply(*a) - *b).norm() < 1e-6);
        }
    }
    CHECK(hits > 50);
}

TEST_CASE("scene plane frame and bounds")
{
    const ScenePlane plane(Vec3(0, 0, 0), Vec3(0, 0, 2), Vec3(1, 0, 0.5), 506, 287);
    CHECK(plane.normal_world().norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(plane.u_axis().dot(plane.normal_world())) < 1e-12);
    CHECK((plane.v_axis() - Vec3(0, 1, 0)).norm() < 1e-12);
    const Vec2 q(12, -40);
    CHECK((plane.to_plane(plane.to_world(q)) - q).norm() < 1e-12);
    CHECK(plane.contains(Vec2(253, 143.5)));
    CHECK_FALSE(plane.contains(Vec2(253, 143.5), 1.0));
    CHECK_THROWS_AS(ScenePlane(Vec3::Zero(), Vec3::Zero(), Vec3(1, 0, 0), 1, 1), InvalidArgument);
    CHECK_THROWS_AS(ScenePlane(Vec3::Zero(), Vec3(1, 0, 0), Vec3(2, 0, 0), 1, 1), InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST_CASE("on-axis eye gives a symmetric frustum")
{
    const auto e = offaxis_extents(Vec3(0, 0, 300), panel(), 1, 1000);
    CHECK(e.left == doctest::Approx(-e.right));
    CHECK(e.bottom == doctest::Approx(-e.top));
}

TEST_CASE("panel corners land on the NDC corners")
{
    const auto d = panel();
    const Mat4 m = offaxis_frustum(Vec3(0, 0, 300), d, 1, 1000);
    const auto ndc = project_ndc(m, Vec3(54.5, 30.5, 0));
    REQUIRE(ndc);
    CHECK(ndc->x() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ndc->y() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("off-axis corners match a ray-through-point construction")
{
    const auto d = panel();
    const Vec3 eye(50, 0, 300);
    const Mat4 m = offaxis_frustum(eye, d, 1, 1000);
    // Points along eye->corner rays, on both sides of the panel, all share
    // the corner's NDC position.
    const std::array<Vec2, 4> expect{Vec2(-1, 1), Vec2(1, 1), Vec2(1, -1), Vec2(-1, -1)};
    const auto corners = d.corners();
    for (int i = 0; i < 4; ++i) {
        for (double s : {0.2, 1.0, 3.0}) {
            const Vec3 p = eye + s * (corners[i] - eye);
            const auto ndc = project_ndc(m, p);
            REQUIRE(ndc);
            CHECK(std::abs(ndc->x() - expect[i].x()) < 1e-9);
            CHECK(std::abs(ndc->y() - expect[i].y()) < 1e-9);
        }
    }
}

TEST_CASE("random eyes: corners exact and rays project to their display point")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> xy(-300, 300), z(20, 800), px(0, 1);
    const auto d = panel();
    for (int i = 0; i < 200; ++i) {
        const Vec3 eye(xy(rng), xy(rng), z(rng));
        const Mat4 m = offaxis_frustum(eye, d, 1, 1e5);
        const auto corners = d.corners();
        const std::array<Vec2, 4> expect{Vec2(-1, 1), Vec2(1, 1), Vec2(1, -1), Vec2(-1, -1)};
        for (int c = 0; c < 4; ++c) {
            const auto ndc = project_ndc(m, corners[c]);
            REQUIRE(ndc);
            CHECK((ndc->head<2>() - expect[c]).cwiseAbs().maxCoeff() <= 1e-9);
        }
        const Vec2 pix(px(rng) * 1920, px(rng) * 1080);
        const Vec3 p = d.physical_point(pix);
        const auto ndc = project_ndc(m, eye + 2.5 * (p - eye));
        REQUIRE(ndc);
        CHECK((ndc_to_display_px(ndc->head<2>(), d) - pix).norm() < 1e-6);
    }
}

TEST_CASE("off-axis frustum rejects eyes at or behind the panel")
{
    CHECK_THROWS_AS(offaxis_frustum(Vec3(0, 0, 0), panel(), 1, 100), DegenerateGeometry);
    CHECK_THROWS_AS(offaxis_frustum(Vec3(0, 0, -5), panel(), 1, 100), DegenerateGeometry);
    CHECK_THROWS_AS(offaxis_frustum(Vec3(0, 0, 300), panel(), 0, 100), InvalidArgument);
    CHECK_THROWS_AS(offaxis_frustum(Vec3(0, 0, 300), panel(), 10, 10), InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST_CASE("eye state invariants")
{
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> u(-200, 200), z(1, 600), ipd(40, 80);
    for (int i = 0; i < 100; ++i) {
        const Vec3 c(u(rng), u(rng), z(rng));
        const double d = ipd(rng);
        const auto e = EyeState::from_cyclopean(c, d);
        CHECK(std::abs((e.left() - e.right()).norm() - d) < 1e-6);
        CHECK((0.5 * (e.left() + e.right()) - c).norm() < 1e-6);
        CHECK(e.left().x() < e.right().x());
        const auto moved = e.displaced(Vec3(5, -3, 7));
        CHECK(std::abs(moved.ipd_mm() - d) < 1e-9);
        CHECK((moved.cyclopean() - (c + Vec3(5, -3, 7))).norm() < 1e-12);
    }
    CHECK_THROWS_AS(EyeState::from_cyclopean(Vec3(0, 0, 0), 63), InvalidArgument);
    CHECK_THROWS_AS(EyeState::from_cyclopean(Vec3(0, 0, -10), 63), InvalidArgument);
    const auto e = EyeState::from_eyes(Vec3(-30, 0, 100), Vec3(30, 10, 120));
    CHECK((e.cyclopean() - Vec3(0, 5, 110)).norm() < 1e-12);
}
