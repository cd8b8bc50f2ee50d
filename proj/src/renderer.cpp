#include "synthact/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthact/errors.hpp"
#include "synthact/parallel.hpp"

namespace synthact {

namespace {

constexpr double kNearPlane = 0.01;        // meters
constexpr double kOpacityCap = 0.99;
constexpr double kCovDilation = 0.3;       // pixels^2
constexpr double kAlphaCutoff = 1.0 / 255.0;
constexpr double kTransmittanceStop = 1e-4;

// Screen-space support radius in units of sigma. Never tighter than the
// 3-sigma ellipse, and wide enough that everything outside contributes
// less than 1/255 at the splat's opacity.
double support_sigmas(double opacity) {
    if (opacity * kOpacityCap <= kAlphaCutoff) return 0.0;
    double r = std::sqrt(2.0 * std::log(opacity / kAlphaCutoff));
    return std::max(3.0, r);
}

}  // namespace

void Camera::validate() const {
    if (!(focal > 0.0))
        throw ValidationError("camera.focal: must be positive");
    if (width < 1 || height < 1)
        throw ValidationError("camera: width and height must be >= 1");
    if (std::abs(orientation.norm() - 1.0) > 1e-6)
        throw ValidationError("camera.orientation: quaternion not unit");
}

Eigen::Isometry3d Camera::world_to_camera() const {
    Eigen::Isometry3d cam_to_world = Eigen::Isometry3d::Identity();
    cam_to_world.translate(position);
    cam_to_world.rotate(orientation);
    return cam_to_world.inverse();
}

std::optional<Splat2D> project_splat(const PosedSplat& splat,
                                     const Camera& cam) {
    cam.validate();

    const Eigen::Isometry3d w2c = cam.world_to_camera();
    const Eigen::Vector3d p = w2c * splat.mu;
    if (p.z() <= kNearPlane) return std::nullopt;

    const double inv_z = 1.0 / p.z();
    Eigen::Vector2d center(cam.focal * p.x() * inv_z + cam.principal.x(),
                           cam.focal * p.y() * inv_z + cam.principal.y());

    // 3D covariance from the splat's rotation and per-axis stddevs.
    const Eigen::Matrix3d r = splat.rot.toRotationMatrix();
    const Eigen::Matrix3d sigma3 =
        r * splat.scale.array().square().matrix().asDiagonal() * r.transpose();

    // Pinhole Jacobian at the camera-space position.
    Eigen::Matrix<double, 2, 3> jac;
    jac << cam.focal * inv_z, 0.0, -cam.focal * p.x() * inv_z * inv_z,
           0.0, cam.focal * inv_z, -cam.focal * p.y() * inv_z * inv_z;

    const Eigen::Matrix3d w = w2c.rotation();
    Eigen::Matrix2d cov =
        jac * w * sigma3 * w.transpose() * jac.transpose();
    cov += kCovDilation * Eigen::Matrix2d::Identity();
    cov = 0.5 * (cov + cov.transpose());  // keep exactly symmetric

    // Viewport test against the support circle of the larger eigenvalue.
    const double s = support_sigmas(splat.opacity);
    if (s == 0.0) return std::nullopt;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const double radius = s * std::sqrt(eig.eigenvalues().maxCoeff());
    if (center.x() + radius < 0.0 || center.x() - radius > cam.width - 1 ||
        center.y() + radius < 0.0 || center.y() - radius > cam.height - 1)
        return std::nullopt;

    return Splat2D{center, cov, p.z(), splat.color, splat.opacity};
}

Framebuffer rasterize(const std::vector<Splat2D>& splats, const Camera& cam,
                      const Eigen::Vector3d& background) {
    cam.validate();

    // Depth-ascending order, stable in input index.
    std::vector<std::size_t> order(splats.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return splats[a].depth < splats[b].depth;
                     });

    const int w = cam.width;
    const int h = cam.height;
    std::vector<double> trans(static_cast<std::size_t>(w) * h, 1.0);
    std::vector<double> accum(static_cast<std::size_t>(w) * h * 3, 0.0);

    for (std::size_t idx : order) {
        const Splat2D& sp = splats[idx];
        const Eigen::Matrix2d inv = sp.cov.inverse();

        // Pixel bounding box of the region where alpha can reach 1/255.
        if (sp.opacity * kOpacityCap <= kAlphaCutoff) continue;
        const double rs = std::sqrt(2.0 * std::log(sp.opacity / kAlphaCutoff));
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sp.cov);
        const double radius = rs * std::sqrt(eig.eigenvalues().maxCoeff());
        const int x0 = std::max(0, static_cast<int>(std::floor(sp.center.x() - radius)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(sp.center.x() + radius)));
        const int y0 = std::max(0, static_cast<int>(std::floor(sp.center.y() - radius)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(sp.center.y() + radius)));

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const std::size_t pix = static_cast<std::size_t>(y) * w + x;
                double& t = trans[pix];
                if (t < kTransmittanceStop) continue;
                const Eigen::Vector2d d(x - sp.center.x(), y - sp.center.y());
                const double q = d.dot(inv * d);
                double alpha = sp.opacity * std::exp(-0.5 * q);
                if (alpha < kAlphaCutoff) continue;
                if (alpha > kOpacityCap) alpha = kOpacityCap;
                const double contrib = alpha * t;
                accum[pix * 3 + 0] += sp.color.x() * contrib;
                accum[pix * 3 + 1] += sp.color.y() * contrib;
                accum[pix * 3 + 2] += sp.color.z() * contrib;
                t *= 1.0 - alpha;
            }
        }
    }

    Framebuffer fb(w, h, 4);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t pix = static_cast<std::size_t>(y) * w + x;
            const double t = trans[pix];
            for (int c = 0; c < 3; ++c)
                fb.at(x, y, c) = accum[pix * 3 + c] + background[c] * t;
            fb.at(x, y, 3) = 1.0 - t;
        }
    }
    return fb;
}

Framebuffer render_pose(const Avatar& avatar, const Pose& pose,
                        const Camera& cam, const Eigen::Vector3d& background) {
    const auto posed = skin_avatar(avatar, pose);
    std::vector<Splat2D> splats;
    splats.reserve(posed.size());
    for (const PosedSplat& s : posed)
        if (auto p = project_splat(s, cam)) splats.push_back(*p);
    return rasterize(splats, cam, background);
}

std::vector<Framebuffer> render_sequence(const Avatar& avatar,
                                         const PoseSequence& seq,
                                         const Camera& cam, unsigned jobs) {
    seq.validate();
    const std::size_t J = avatar.skeleton.joints.size();
    if (seq.frames.front().rots.size() != J)
        throw ValidationError("pose sequence does not match avatar skeleton");

    const Eigen::Vector3d white(1.0, 1.0, 1.0);
    std::vector<Framebuffer> frames(seq.frames.size());
    parallel_for(seq.frames.size(), jobs, [&](std::size_t f) {
        frames[f] = render_pose(avatar, seq.frames[f], cam, white);
    });
    return frames;
}

}  // namespace synthact
