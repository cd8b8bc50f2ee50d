#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace synthact {

struct Joint {
    std::string name;
    std::optional<int> parent;   // none for the root
    Eigen::Vector3d offset;      // translation from parent, canonical pose, meters
};

// Joint hierarchy in topological order: exactly one root, parent index
// strictly below child index, unique names.
struct Skeleton {
    std::vector<Joint> joints;

    int joint_count() const { return static_cast<int>(joints.size()); }
    int root_index() const;
    std::vector<std::vector<int>> children() const;
    void validate() const;
};

struct SplatWeight {
    int joint;
    double weight;
};

// Canonical-space anisotropic Gaussian with appearance and up to four
// skinning weights summing to one.
struct GaussianSplat {
    Eigen::Vector3d mu;           // canonical mean, meters
    Eigen::Vector3d scale;        // per-axis stddev, meters
    Eigen::Quaterniond rot;       // unit, stored (w,x,y,z) in files
    Eigen::Vector3d color;        // RGB in [0,1]
    double opacity = 1.0;         // [0,1]
    std::vector<SplatWeight> weights;
};

struct Avatar {
    std::string id;
    Skeleton skeleton;
    std::vector<GaussianSplat> splats;

    void validate() const;
};

// One animation frame: root translation plus one local rotation per joint.
struct Pose {
    Eigen::Vector3d root_t = Eigen::Vector3d::Zero();
    std::vector<Eigen::Quaterniond> rots;
};

Pose rest_pose(const Skeleton& skeleton);

// World transform per joint:
//   transform[j] = transform[parent] * translate(offset_j) * rotate(rots_j)
// with the root additionally translated by root_t.
std::vector<Eigen::Isometry3d> forward_kinematics(const Skeleton& skeleton,
                                                  const Pose& pose);

struct PosedSplat {
    Eigen::Vector3d mu;
    Eigen::Vector3d scale;
    Eigen::Quaterniond rot;
    Eigen::Vector3d color;
    double opacity;
};

// Linear blend skinning of splat means; splat rotation follows the
// dominant-weight joint (ties broken by lower joint index).
std::vector<PosedSplat> skin_avatar(const Avatar& avatar, const Pose& pose);

// Avatar file format, version 1 (see README). Unknown fields are rejected.
Avatar build_avatar_from_spec(const std::string& document);
Avatar load_avatar(const std::filesystem::path& path);
void save_avatar(const Avatar& avatar, const std::filesystem::path& path);

}  // namespace synthact
