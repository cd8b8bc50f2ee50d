#pragma once

#include <optional>
#include <vector>

#include "synthact/core_model.hpp"
#include "synthact/image.hpp"
#include "synthact/pose.hpp"

namespace synthact {

// RGBA raster in premultiplied-alpha convention (plus whatever background
// color rasterize baked in, scaled by the remaining transmittance).
using Framebuffer = Image;

struct Camera {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond orientation =
        Eigen::Quaterniond::Identity();     // camera-to-world
    double focal = 0.0;                     // pixels
    Eigen::Vector2d principal = Eigen::Vector2d::Zero();
    int width = 0;
    int height = 0;

    void validate() const;
    // World-to-camera rigid transform; camera space is right/down/forward
    // with depth along +z.
    Eigen::Isometry3d world_to_camera() const;
};

struct Splat2D {
    Eigen::Vector2d center;    // pixels
    Eigen::Matrix2d cov;       // pixels^2, symmetric positive-definite
    double depth = 0.0;        // camera-space z, meters
    Eigen::Vector3d color;
    double opacity = 0.0;
};

// EWA-style projection: Sigma2d = J W Sigma3d W^T J^T + 0.3 I with W the
// world-to-camera rotation and J the pinhole Jacobian at the splat's
// camera-space position. Returns nullopt when the splat is culled (depth
// <= 0.01 m or its screen-space footprint misses the viewport; the culling
// radius is never tighter than the alpha >= 1/255 support).
std::optional<Splat2D> project_splat(const PosedSplat& splat,
                                     const Camera& cam);

// Front-to-back alpha blending over a uniform background color. Splats are
// sorted by depth ascending, ties broken by input index. Per pixel:
// alpha = clamp(opacity * exp(-0.5 d^T cov^-1 d), 0, 0.99), contributions
// below 1/255 are skipped, blending stops once transmittance drops below
// 1e-4. Output rgb = accumulated color + background * T, alpha = 1 - T.
Framebuffer rasterize(const std::vector<Splat2D>& splats, const Camera& cam,
                      const Eigen::Vector3d& background);

// One white-background frame per pose frame; frames render in parallel.
std::vector<Framebuffer> render_sequence(const Avatar& avatar,
                                         const PoseSequence& seq,
                                         const Camera& cam,
                                         unsigned jobs = 0);

// Single-frame convenience used by rendering and fitting.
Framebuffer render_pose(const Avatar& avatar, const Pose& pose,
                        const Camera& cam, const Eigen::Vector3d& background);

}  // namespace synthact
