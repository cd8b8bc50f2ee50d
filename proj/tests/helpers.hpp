#pragma once

#include <filesystem>
#include <string>

#include "synthact/core_model.hpp"
#include "synthact/renderer.hpp"

namespace testutil {

inline synthact::Skeleton two_joint_skeleton() {
    synthact::Skeleton s;
    s.joints.push_back({"root", std::nullopt, Eigen::Vector3d::Zero()});
    s.joints.push_back({"child", 0, Eigen::Vector3d(0.0, 1.0, 0.0)});
    return s;
}

inline synthact::GaussianSplat splat_at(const Eigen::Vector3d& mu,
                                        double scale,
                                        const Eigen::Vector3d& color,
                                        double opacity, int joint) {
    synthact::GaussianSplat g;
    g.mu = mu;
    g.scale = Eigen::Vector3d::Constant(scale);
    g.rot = Eigen::Quaterniond::Identity();
    g.color = color;
    g.opacity = opacity;
    g.weights = {{joint, 1.0}};
    return g;
}

inline synthact::Avatar tiny_avatar() {
    synthact::Avatar a;
    a.id = "tiny";
    a.skeleton = two_joint_skeleton();
    a.splats.push_back(splat_at({0.0, 0.5, 0.0}, 0.1, {1.0, 0.0, 0.0},
                                0.8, 0));
    return a;
}

// Identity-orientation camera at the origin: world +z is straight ahead,
// +y is image-down.
inline synthact::Camera test_camera(int w = 64, int h = 64,
                                    double focal = 60.0) {
    synthact::Camera cam;
    cam.position.setZero();
    cam.orientation = Eigen::Quaterniond::Identity();
    cam.focal = focal;
    cam.principal = Eigen::Vector2d((w - 1) * 0.5, (h - 1) * 0.5);
    cam.width = w;
    cam.height = h;
    return cam;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("synthact_test_" + tag + "_" + std::to_string(counter_++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    static inline int counter_ = 0;
};

}  // namespace testutil
