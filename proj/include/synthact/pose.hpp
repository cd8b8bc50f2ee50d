#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "synthact/core_model.hpp"

namespace synthact {

// Joint-rotation motion at a fixed frame rate.
struct PoseSequence {
    double fps = 0.0;
    std::string skeleton_ref;
    std::vector<Pose> frames;

    void validate() const;
    double duration_seconds() const {
        return frames.size() <= 1 ? 0.0
                                  : (frames.size() - 1) / fps;
    }
};

// World-space joint position tracks, same joint order as the skeleton they
// will be solved against.
struct KeypointSequence {
    double fps = 0.0;
    std::vector<std::vector<Eigen::Vector3d>> frames;

    void validate() const;
};

// Constant length / frame-rate target. Defaults follow the pipeline's two
// streams: identity captures at 18 s / 18 FPS, references at 20 s / 25 FPS.
struct NormalizationPolicy {
    double target_seconds = 0.0;
    double target_fps = 0.0;

    int frame_count() const;
    void validate() const;
};

PoseSequence load_pose_sequence(const std::string& document);
PoseSequence load_pose_sequence_file(const std::filesystem::path& path);
void save_pose_sequence(const PoseSequence& seq,
                        const std::filesystem::path& path);

KeypointSequence load_keypoint_sequence(const std::string& document);
KeypointSequence load_keypoint_sequence_file(const std::filesystem::path& path);
void save_keypoint_sequence(const KeypointSequence& seq,
                            const std::filesystem::path& path);

// Resamples to exactly round(target_seconds * target_fps) frames at
// target_fps. Sample times cover the source span endpoint-to-endpoint;
// rotations are slerped along the shorter arc, root translation linearly.
PoseSequence resample(const PoseSequence& seq,
                      const NormalizationPolicy& policy);

// Solves per-joint local rotations so canonical child-bone directions align
// with the observed ones. Joints with several children use an orthogonal
// Procrustes fit over all child bones; leaves get identity. Twist about the
// bone axis is unobservable and left at zero.
PoseSequence keypoints_to_pose(const KeypointSequence& kp,
                               const Skeleton& skeleton);

}  // namespace synthact
