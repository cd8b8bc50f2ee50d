#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "helpers.hpp"
#include "synthact/renderer.hpp"
#include "synthact/toybench.hpp"

using namespace synthact;

namespace {

PosedSplat posed(const Eigen::Vector3d& mu, double scale,
                 const Eigen::Vector3d& color, double opacity) {
    return {mu, Eigen::Vector3d::Constant(scale),
            Eigen::Quaterniond::Identity(), color, opacity};
}

bool images_equal(const Image& a, const Image& b) {
    return a.width == b.width && a.height == b.height &&
           a.channels == b.channels &&
           std::memcmp(a.data.data(), b.data.data(),
                       a.data.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("on-axis isotropic splat projects to the analytic covariance") {
    const Camera cam = testutil::test_camera(64, 64, 80.0);
    const double s = 0.05, z = 2.0;
    const auto p = project_splat(posed({0, 0, z}, s, {1, 0, 0}, 0.9), cam);
    REQUIRE(p.has_value());
    CHECK((p->center - cam.principal).norm() < 1e-12);
    CHECK(p->depth == doctest::Approx(z));
    const double expect = std::pow(cam.focal * s / z, 2) + 0.3;
    CHECK(std::abs(p->cov(0, 0) - expect) < 1e-6);
    CHECK(std::abs(p->cov(1, 1) - expect) < 1e-6);
    CHECK(std::abs(p->cov(0, 1)) < 1e-6);
}

TEST_CASE("splats behind the camera are culled") {
    const Camera cam = testutil::test_camera();
    CHECK_FALSE(project_splat(posed({0, 0, -1.0}, 0.05, {1, 0, 0}, 0.9), cam)
                    .has_value());
    CHECK_FALSE(project_splat(posed({0, 0, 0.005}, 0.05, {1, 0, 0}, 0.9), cam)
                    .has_value());
}

TEST_CASE("doubling depth halves the off-axis center offset") {
    const Camera cam = testutil::test_camera(128, 128, 100.0);
    const Eigen::Vector3d base(0.3, 0.2, 2.0);
    const auto near = project_splat(posed(base, 0.02, {1, 0, 0}, 0.9), cam);
    const auto far =
        project_splat(posed(2.0 * base, 0.02, {1, 0, 0}, 0.9), cam);
    REQUIRE(near.has_value());
    REQUIRE(far.has_value());
    const Eigen::Vector2d off_near = near->center - cam.principal;
    const Eigen::Vector2d off_far = far->center - cam.principal;
    CHECK((off_near - off_far).norm() < 1e-9);  // same ray
    // A doubled-depth splat at the same world offset lands at half.
    const auto shifted =
        project_splat(posed({0.3, 0.2, 4.0}, 0.02, {1, 0, 0}, 0.9), cam);
    REQUIRE(shifted.has_value());
    CHECK(((shifted->center - cam.principal) - 0.5 * off_near).norm() < 1e-9);
}

TEST_CASE("empty scene over white renders white with zero alpha") {
    const Camera cam = testutil::test_camera(16, 16);
    const Framebuffer fb = rasterize({}, cam, {1.0, 1.0, 1.0});
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(fb.at(x, y, 0) == 1.0);
            CHECK(fb.at(x, y, 1) == 1.0);
            CHECK(fb.at(x, y, 2) == 1.0);
            CHECK(fb.at(x, y, 3) == 0.0);
        }
}

TEST_CASE("single-splat center pixel is the closed-form single-term blend") {
    const Camera cam = testutil::test_camera(33, 33, 40.0);
    // Center lands exactly on the middle pixel.
    for (double op : {0.4, 0.995}) {
        Splat2D sp{cam.principal, 10.0 * Eigen::Matrix2d::Identity(), 1.0,
                   {0.2, 0.6, 0.9}, op};
        const Framebuffer fb = rasterize({sp}, cam, {0.0, 0.0, 0.0});
        const double a = std::min(op, 0.99);
        CHECK(std::abs(fb.at(16, 16, 0) - 0.2 * a) < 1e-9);
        CHECK(std::abs(fb.at(16, 16, 1) - 0.6 * a) < 1e-9);
        CHECK(std::abs(fb.at(16, 16, 2) - 0.9 * a) < 1e-9);
        CHECK(std::abs(fb.at(16, 16, 3) - a) < 1e-9);
    }
}

TEST_CASE("two overlapping splats blend front to back") {
    const Camera cam = testutil::test_camera(33, 33, 40.0);
    const Eigen::Matrix2d cov = 8.0 * Eigen::Matrix2d::Identity();
    Splat2D nearer{cam.principal, cov, 1.0, {1.0, 0.0, 0.0}, 0.6};
    Splat2D farther{cam.principal + Eigen::Vector2d(1.0, 0.0), cov, 2.0,
                    {0.0, 1.0, 0.0}, 0.7};
    // Input order reversed from depth order on purpose.
    const Framebuffer fb = rasterize({farther, nearer}, cam, {0, 0, 0});

    const double a1 = 0.6;  // at its own center
    const Eigen::Vector2d d(16.0 - (cam.principal.x() + 1.0), 0.0);
    const double a2 =
        0.7 * std::exp(-0.5 * d.dot(cov.inverse() * d));
    CHECK(std::abs(fb.at(16, 16, 0) - a1) < 1e-6);
    CHECK(std::abs(fb.at(16, 16, 1) - a2 * (1.0 - a1)) < 1e-6);
    CHECK(std::abs(fb.at(16, 16, 3) - (1.0 - (1.0 - a1) * (1.0 - a2))) <
          1e-6);
}

TEST_CASE("framebuffer invariants hold on a full avatar render") {
    const Avatar a = make_humanoid_avatar("fb", 77);
    const Camera cam = default_camera(96, 96);
    const Framebuffer fb =
        render_pose(a, rest_pose(a.skeleton), cam, {0.0, 0.0, 0.0});
    bool any_alpha = false;
    for (int y = 0; y < fb.height; ++y)
        for (int x = 0; x < fb.width; ++x) {
            const double al = fb.at(x, y, 3);
            CHECK(al >= 0.0);
            CHECK(al <= 1.0);
            for (int c = 0; c < 3; ++c) {
                CHECK(fb.at(x, y, c) >= 0.0);
                CHECK(fb.at(x, y, c) <= al + 1e-6);
            }
            any_alpha = any_alpha || al > 0.5;
        }
    CHECK(any_alpha);
}

TEST_CASE("adding a splat never decreases alpha") {
    const Camera cam = testutil::test_camera(17, 17, 20.0);
    const Eigen::Matrix2d cov = 6.0 * Eigen::Matrix2d::Identity();
    std::vector<Splat2D> splats{
        {cam.principal, cov, 1.0, {1, 0, 0}, 0.5}};
    const Framebuffer before = rasterize(splats, cam, {0, 0, 0});
    splats.push_back({cam.principal + Eigen::Vector2d(2, 2), cov, 0.5,
                      {0, 1, 0}, 0.5});
    const Framebuffer after = rasterize(splats, cam, {0, 0, 0});
    for (int y = 0; y < 17; ++y)
        for (int x = 0; x < 17; ++x)
            CHECK(after.at(x, y, 3) >= before.at(x, y, 3) - 1e-12);
}

TEST_CASE("an opaque near splat dominates a far one") {
    const Camera cam = testutil::test_camera(17, 17, 20.0);
    const Eigen::Matrix2d cov = 50.0 * Eigen::Matrix2d::Identity();
    Splat2D nearer{cam.principal, cov, 1.0, {1, 0, 0}, 0.99};
    Splat2D farther{cam.principal, cov, 5.0, {0, 0, 1}, 0.99};
    const Framebuffer fb = rasterize({farther, nearer}, cam, {0, 0, 0});
    // At the shared center the far color is limited to the 1% leak.
    CHECK(fb.at(8, 8, 0) == doctest::Approx(0.99));
    CHECK(fb.at(8, 8, 2) <= 0.01);
}

TEST_CASE("rigid equivariance of the full render") {
    const Avatar a = make_humanoid_avatar("rigid_eq", 5);
    Camera cam = default_camera(64, 64);
    const Framebuffer base =
        render_pose(a, rest_pose(a.skeleton), cam, {1.0, 1.0, 1.0});

    // Rotate scene and camera together about an arbitrary axis.
    const Eigen::Quaterniond g(
        Eigen::AngleAxisd(0.8, Eigen::Vector3d(1, 2, 3).normalized()));
    const Eigen::Vector3d g_t(0.4, -0.2, 0.7);
    Pose moved = rest_pose(a.skeleton);
    moved.rots[0] = g;
    moved.root_t = g_t;
    Camera moved_cam = cam;
    moved_cam.position = g * cam.position + g_t;
    moved_cam.orientation = g * cam.orientation;
    const Framebuffer transformed =
        render_pose(a, moved, moved_cam, {1.0, 1.0, 1.0});

    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            for (int c = 0; c < 4; ++c)
                CHECK(std::abs(base.at(x, y, c) -
                               transformed.at(x, y, c)) < 1e-5);
}

TEST_CASE("re-rendering is bit-identical") {
    const Avatar a = make_humanoid_avatar("det", 13);
    const Camera cam = default_camera(80, 80);
    PoseSequence seq = scripted_motion(2, 4, 0.5, 4.0);
    const auto frames1 = render_sequence(a, seq, cam, 4);
    const auto frames2 = render_sequence(a, seq, cam, 1);
    REQUIRE(frames1.size() == frames2.size());
    for (std::size_t f = 0; f < frames1.size(); ++f)
        CHECK(images_equal(frames1[f], frames2[f]));
}

TEST_CASE("render_sequence emits one frame per pose frame") {
    const Avatar a = testutil::tiny_avatar();
    PoseSequence seq;
    seq.fps = 25.0;
    seq.skeleton_ref = "two";
    Pose p = rest_pose(a.skeleton);
    seq.frames.assign(500, p);
    Camera cam = testutil::test_camera(8, 8);
    cam.position = {0.0, 0.5, -2.0};
    CHECK(render_sequence(a, seq, cam).size() == 500);
}

TEST_CASE("culled splats would not contribute above 1/255 anywhere") {
    // Off-viewport splats, re-evaluated analytically at every viewport
    // pixel: the peak possible contribution stays below the cutoff.
    const Camera cam = testutil::test_camera(32, 32, 40.0);
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::uniform_real_distribution<double> su(0.005, 0.08);
    int culled_offscreen = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const double scale = su(gen);
        const Eigen::Vector3d mu(u(gen), u(gen), 2.0 + std::abs(u(gen)));
        const PosedSplat s = posed(mu, scale, {1, 0, 0}, 0.99);
        if (project_splat(s, cam)) continue;
        ++culled_offscreen;
        // Independent closed form for an isotropic splat under an identity
        // camera: Sigma2 = s^2 (f/z)^2 (I + pp^T/z^2) + 0.3 I with
        // p = (x, y).
        const double z = mu.z();
        const Eigen::Vector2d p(mu.x(), mu.y());
        const Eigen::Vector2d center =
            cam.focal / z * p + cam.principal;
        const Eigen::Matrix2d cov =
            scale * scale * std::pow(cam.focal / z, 2) *
                (Eigen::Matrix2d::Identity() + p * p.transpose() / (z * z)) +
            0.3 * Eigen::Matrix2d::Identity();
        const Eigen::Matrix2d inv = cov.inverse();
        double peak = 0.0;
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                const Eigen::Vector2d d(x - center.x(), y - center.y());
                peak = std::max(peak,
                                0.99 * std::exp(-0.5 * d.dot(inv * d)));
            }
        CHECK(peak < 1.0 / 255.0 + 1e-9);
    }
    CHECK(culled_offscreen > 0);
}
