#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "synthact/errors.hpp"
#include "synthact/fitting.hpp"
#include "synthact/renderer.hpp"

using namespace synthact;

namespace {

// A 10-splat, 2-joint avatar in front of an identity camera.
Avatar ten_splat_avatar(unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Avatar a;
    a.id = "ten";
    a.skeleton = testutil::two_joint_skeleton();
    for (int i = 0; i < 10; ++i) {
        const double x = -0.45 + 0.1 * i;
        GaussianSplat g = testutil::splat_at(
            {x, 0.5 + 0.3 * std::sin(2.1 * i), 2.0}, 0.08,
            {u(gen), u(gen), u(gen)}, 0.5 + 0.4 * u(gen), i % 2);
        a.splats.push_back(g);
    }
    return a;
}

FitTarget target_from(const Avatar& truth, const Camera& cam,
                      int num_frames) {
    FitTarget t;
    t.camera = cam;
    for (int f = 0; f < num_frames; ++f) {
        Pose pose = rest_pose(truth.skeleton);
        pose.rots[1] = Eigen::Quaterniond(Eigen::AngleAxisd(
            0.15 * f, Eigen::Vector3d::UnitZ()));
        t.frames.emplace_back(
            pose, render_pose(truth, pose, cam, {1.0, 1.0, 1.0}));
    }
    return t;
}

}  // namespace

TEST_CASE("loss is zero against the avatar's own renders") {
    const Avatar a = ten_splat_avatar(1);
    const Camera cam = testutil::test_camera(64, 64, 60.0);
    const FitTarget t = target_from(a, cam, 3);
    CHECK(photometric_loss(a, t) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("all-black target against an empty-looking render gives loss 1") {
    // No visible splats: render over white is all-white; target all black.
    Avatar a = testutil::tiny_avatar();
    a.splats[0].mu = {100.0, 100.0, 100.0};  // far off screen
    const Camera cam = testutil::test_camera(16, 16);
    FitTarget t;
    t.camera = cam;
    t.frames.emplace_back(rest_pose(a.skeleton), Image(16, 16, 4));
    CHECK(photometric_loss(a, t) == doctest::Approx(1.0));
}

TEST_CASE("single-channel color perturbation changes loss by the "
          "analytic amount") {
    const Avatar a = ten_splat_avatar(2);
    const Camera cam = testutil::test_camera(48, 48, 50.0);
    const FitTarget t = target_from(a, cam, 2);

    Avatar perturbed = a;
    perturbed.splats[3].color[1] =
        std::min(1.0, perturbed.splats[3].color[1] + 0.1);
    const double dc = perturbed.splats[3].color[1] - a.splats[3].color[1];

    // The blend is linear in colors, so the loss is
    // mean((w_p * dc)^2) with w_p the splat's blend weight per pixel.
    // Measure w_p via two black-vs-white probe renders of that splat alone.
    double expect = 0.0;
    for (const auto& [pose, fb] : t.frames) {
        Avatar probe = a;
        for (std::size_t i = 0; i < probe.splats.size(); ++i)
            probe.splats[i].color = Eigen::Vector3d::Zero();
        probe.splats[3].color = Eigen::Vector3d::Ones();
        const Framebuffer w =
            render_pose(probe, pose, cam, {0.0, 0.0, 0.0});
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x)
                expect += std::pow(w.at(x, y, 0) * dc, 2);
    }
    expect /= t.frames.size() * cam.width * cam.height * 3.0;
    CHECK(std::abs(photometric_loss(perturbed, t) - expect) < 1e-8);
}

TEST_CASE("color fit recovers known colors for covered splats") {
    const Avatar truth = ten_splat_avatar(3);
    const Camera cam = testutil::test_camera(64, 64, 60.0);
    const FitTarget t = target_from(truth, cam, 4);

    Avatar gray = truth;
    for (auto& s : gray.splats) s.color = {0.5, 0.5, 0.5};
    const auto [fitted, report] = fit_colors(gray, t);
    CHECK(report.final_loss <= report.initial_loss);
    CHECK(report.final_loss < 1e-8);

    // Coverage per splat via its blend weight over all frames.
    const double pixels = 64.0 * 64.0;
    for (std::size_t i = 0; i < truth.splats.size(); ++i) {
        Avatar probe = truth;
        for (auto& s : probe.splats) s.color = Eigen::Vector3d::Zero();
        probe.splats[i].color = Eigen::Vector3d::Ones();
        double coverage = 0.0;
        for (const auto& [pose, fb] : t.frames) {
            const Framebuffer w =
                render_pose(probe, pose, cam, {0.0, 0.0, 0.0});
            for (int y = 0; y < cam.height; ++y)
                for (int x = 0; x < cam.width; ++x)
                    coverage += w.at(x, y, 0) > 0.05 ? 1.0 : 0.0;
        }
        coverage /= t.frames.size() * pixels;
        if (coverage >= 0.01)
            CHECK((fitted.splats[i].color - truth.splats[i].color)
                      .cwiseAbs()
                      .maxCoeff() < 1e-4);
    }
}

TEST_CASE("zero-coverage splats stay at their initialization") {
    Avatar truth = ten_splat_avatar(4);
    const Camera cam = testutil::test_camera(48, 48, 50.0);
    const FitTarget t = target_from(truth, cam, 2);

    Avatar init = truth;
    init.splats.push_back(testutil::splat_at(
        {50.0, 50.0, 2.0}, 0.05, {0.123, 0.456, 0.789}, 0.9, 0));
    const auto [fitted, report] = fit_colors(init, t);
    CHECK((fitted.splats.back().color -
           Eigen::Vector3d(0.123, 0.456, 0.789)).norm() < 1e-9);
    CHECK(report.final_loss <= report.initial_loss);
}

TEST_CASE("already-optimal avatar keeps its loss") {
    const Avatar truth = ten_splat_avatar(5);
    const Camera cam = testutil::test_camera(48, 48, 50.0);
    const FitTarget t = target_from(truth, cam, 2);
    const auto [fitted, report] = fit_colors(truth, t);
    CHECK(std::abs(report.final_loss - report.initial_loss) < 1e-10);
}

TEST_CASE("fitting only changes colors") {
    const Avatar truth = ten_splat_avatar(6);
    const Camera cam = testutil::test_camera(32, 32, 30.0);
    const FitTarget t = target_from(truth, cam, 2);
    Avatar init = truth;
    for (auto& s : init.splats) s.color = {0.2, 0.2, 0.2};
    const auto [fitted, report] = fit_colors(init, t);
    (void)report;
    for (std::size_t i = 0; i < truth.splats.size(); ++i) {
        CHECK((fitted.splats[i].mu - init.splats[i].mu).norm() == 0.0);
        CHECK((fitted.splats[i].scale - init.splats[i].scale).norm() == 0.0);
        CHECK(fitted.splats[i].opacity == init.splats[i].opacity);
    }
}

TEST_CASE("opacity descent cuts the loss on a high-coverage scene") {
    // Large splats covering most of the frame give the descent useful
    // gradients; small-footprint scenes only shrink the loss slowly.
    Avatar truth;
    truth.id = "big";
    truth.skeleton = testutil::two_joint_skeleton();
    truth.splats.push_back(
        testutil::splat_at({-0.3, 0.5, 2.0}, 0.5, {0.9, 0.1, 0.1}, 0.9, 0));
    truth.splats.push_back(
        testutil::splat_at({0.3, 0.5, 2.0}, 0.5, {0.1, 0.8, 0.2}, 0.7, 1));
    truth.splats.push_back(
        testutil::splat_at({0.0, 0.2, 2.5}, 0.6, {0.2, 0.2, 0.9}, 0.8, 0));
    const Camera cam = testutil::test_camera(32, 32, 30.0);
    const FitTarget t = target_from(truth, cam, 1);

    Avatar init = truth;
    init.splats[0].opacity = 0.4;
    init.splats[1].opacity = 0.3;
    init.splats[2].opacity = 0.5;
    const double initial = photometric_loss(init, t);
    const auto [fitted, report] = fit_opacities(init, t, 300);
    CHECK(report.initial_loss == doctest::Approx(initial));
    CHECK(report.final_loss <= report.initial_loss);
    CHECK(report.final_loss < 0.25 * report.initial_loss);
    for (const auto& s : fitted.splats) {
        CHECK(s.opacity > 0.0);
        CHECK(s.opacity < 1.0);
    }
}

TEST_CASE("steps must be at least one; a single step runs once") {
    const Avatar a = ten_splat_avatar(8);
    const Camera cam = testutil::test_camera(32, 32, 30.0);
    const FitTarget t = target_from(a, cam, 1);
    CHECK_THROWS_AS(fit_opacities(a, t, 0), ValidationError);
    const auto [fitted, report] = fit_opacities(a, t, 1);
    (void)fitted;
    CHECK(report.iterations <= 1);
    CHECK(report.final_loss <= report.initial_loss);
}

TEST_CASE("finite-difference gradient matches the loss slope") {
    const Avatar truth = ten_splat_avatar(10);
    const Camera cam = testutil::test_camera(48, 48, 50.0);
    const FitTarget t = target_from(truth, cam, 2);

    Avatar init = truth;
    for (auto& s : init.splats)
        s.opacity = std::clamp(s.opacity + 0.15, 0.05, 0.95);

    // FD gradient in logit space, replicated here independently.
    auto logit = [](double p) {
        const double q = std::clamp(p, 1e-6, 1.0 - 1e-6);
        return std::log(q / (1.0 - q));
    };
    auto loss_at = [&](const Eigen::VectorXd& logits) {
        Avatar a = init;
        for (int i = 0; i < logits.size(); ++i)
            a.splats[i].opacity = 1.0 / (1.0 + std::exp(-logits[i]));
        return photometric_loss(a, t);
    };
    const int n = static_cast<int>(init.splats.size());
    Eigen::VectorXd u0(n);
    for (int i = 0; i < n; ++i) u0[i] = logit(init.splats[i].opacity);

    const double h = 1e-3;
    Eigen::VectorXd grad(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd up = u0, down = u0;
        up[i] += h;
        down[i] -= h;
        grad[i] = (loss_at(up) - loss_at(down)) / (2.0 * h);
    }
    // Directional derivative along the gradient vs re-evaluated slope.
    const Eigen::VectorXd dir = grad.normalized();
    const double eps = 1e-4;
    const double slope =
        (loss_at(u0 + eps * dir) - loss_at(u0 - eps * dir)) / (2.0 * eps);
    const double predicted = grad.dot(dir);
    CHECK(std::abs(slope - predicted) <=
          1e-3 * std::max(1.0, std::abs(predicted)));
}

TEST_CASE("accepted losses are non-increasing step by step") {
    const Avatar truth = ten_splat_avatar(11);
    const Camera cam = testutil::test_camera(32, 32, 30.0);
    const FitTarget t = target_from(truth, cam, 2);
    Avatar init = truth;
    for (auto& s : init.splats)
        s.opacity = std::clamp(s.opacity - 0.2, 0.05, 0.95);

    double last = photometric_loss(init, t);
    Avatar current = init;
    for (int step = 0; step < 5; ++step) {
        const auto [next, report] = fit_opacities(current, t, 1);
        CHECK(report.final_loss <= last + 1e-15);
        last = report.final_loss;
        current = next;
    }
}
