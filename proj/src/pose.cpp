#include "synthact/pose.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "synthact/errors.hpp"

namespace synthact {

using jsonutil::json;

void PoseSequence::validate() const {
    if (!(fps > 0.0))
        throw ValidationError("pose sequence: fps must be positive");
    if (frames.empty())
        throw ValidationError("pose sequence: frames must be non-empty");
    const std::size_t J = frames.front().rots.size();
    for (std::size_t f = 0; f < frames.size(); ++f) {
        if (frames[f].rots.size() != J)
            throw ValidationError("frames[" + std::to_string(f) + "]: has " +
                                  std::to_string(frames[f].rots.size()) +
                                  " rotations, expected " + std::to_string(J));
        for (std::size_t r = 0; r < J; ++r)
            if (std::abs(frames[f].rots[r].norm() - 1.0) > 1e-6)
                throw ValidationError("frames[" + std::to_string(f) +
                                      "].rots[" + std::to_string(r) +
                                      "]: quaternion not unit");
    }
}

void KeypointSequence::validate() const {
    if (!(fps > 0.0))
        throw ValidationError("keypoint sequence: fps must be positive");
    if (frames.empty())
        throw ValidationError("keypoint sequence: frames must be non-empty");
    const std::size_t J = frames.front().size();
    for (std::size_t f = 0; f < frames.size(); ++f)
        if (frames[f].size() != J)
            throw ValidationError("frames[" + std::to_string(f) + "]: has " +
                                  std::to_string(frames[f].size()) +
                                  " keypoints, expected " + std::to_string(J));
}

int NormalizationPolicy::frame_count() const {
    return static_cast<int>(std::llround(target_seconds * target_fps));
}

void NormalizationPolicy::validate() const {
    if (!(target_seconds > 0.0) || !(target_fps > 0.0))
        throw ValidationError("normalization: target_seconds and target_fps "
                              "must be positive");
    if (frame_count() < 2)
        throw ValidationError("normalization: target_seconds * target_fps must "
                              "round to >= 2 frames");
}

PoseSequence load_pose_sequence(const std::string& document) {
    json j = jsonutil::parse(document, "pose document");
    jsonutil::expect_keys(j, {"version", "fps", "skeleton_ref", "frames"},
                          "pose");
    jsonutil::expect_version(j, "pose");

    PoseSequence seq;
    seq.fps = jsonutil::get_number(j.at("fps"), "pose.fps");
    seq.skeleton_ref =
        jsonutil::get_string(j.at("skeleton_ref"), "pose.skeleton_ref");
    const json& frames = j.at("frames");
    if (!frames.is_array())
        throw ValidationError("pose.frames: expected an array");
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const std::string fp = "frames[" + std::to_string(f) + "]";
        jsonutil::expect_keys(frames[f], {"root_t", "rots"}, fp);
        Pose pose;
        pose.root_t = jsonutil::get_vec3(frames[f].at("root_t"), fp + ".root_t");
        const json& rots = frames[f].at("rots");
        if (!rots.is_array())
            throw ValidationError(fp + ".rots: expected an array");
        for (std::size_t r = 0; r < rots.size(); ++r)
            pose.rots.push_back(jsonutil::get_unit_quat(
                rots[r], fp + ".rots[" + std::to_string(r) + "]"));
        seq.frames.push_back(std::move(pose));
    }
    seq.validate();
    return seq;
}

PoseSequence load_pose_sequence_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open pose file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_pose_sequence(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void save_pose_sequence(const PoseSequence& seq,
                        const std::filesystem::path& path) {
    json frames = json::array();
    for (const Pose& pose : seq.frames) {
        json rots = json::array();
        for (const Eigen::Quaterniond& q : pose.rots)
            rots.push_back(jsonutil::quat_to_json(q));
        frames.push_back(json{{"root_t", jsonutil::vec3_to_json(pose.root_t)},
                              {"rots", std::move(rots)}});
    }
    json doc;
    doc["version"] = 1;
    doc["fps"] = seq.fps;
    doc["skeleton_ref"] = seq.skeleton_ref;
    doc["frames"] = std::move(frames);
    jsonutil::write_file(path, doc);
}

KeypointSequence load_keypoint_sequence(const std::string& document) {
    json j = jsonutil::parse(document, "keypoint document");
    jsonutil::expect_keys(j, {"version", "fps", "frames"}, "keypoints");
    jsonutil::expect_version(j, "keypoints");

    KeypointSequence seq;
    seq.fps = jsonutil::get_number(j.at("fps"), "keypoints.fps");
    const json& frames = j.at("frames");
    if (!frames.is_array())
        throw ValidationError("keypoints.frames: expected an array");
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const std::string fp = "frames[" + std::to_string(f) + "]";
        if (!frames[f].is_array())
            throw ValidationError(fp + ": expected an array of 3-vectors");
        std::vector<Eigen::Vector3d> points;
        for (std::size_t p = 0; p < frames[f].size(); ++p)
            points.push_back(jsonutil::get_vec3(
                frames[f][p], fp + "[" + std::to_string(p) + "]"));
        seq.frames.push_back(std::move(points));
    }
    seq.validate();
    return seq;
}

KeypointSequence load_keypoint_sequence_file(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open keypoint file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_keypoint_sequence(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void save_keypoint_sequence(const KeypointSequence& seq,
                            const std::filesystem::path& path) {
    json frames = json::array();
    for (const auto& points : seq.frames) {
        json frame = json::array();
        for (const Eigen::Vector3d& p : points)
            frame.push_back(jsonutil::vec3_to_json(p));
        frames.push_back(std::move(frame));
    }
    json doc;
    doc["version"] = 1;
    doc["fps"] = seq.fps;
    doc["frames"] = std::move(frames);
    jsonutil::write_file(path, doc);
}

namespace {

// Shortest-arc slerp; flips the sign of q1 when dot(q0, q1) < 0.
Eigen::Quaterniond slerp_shortest(const Eigen::Quaterniond& q0,
                                  Eigen::Quaterniond q1, double u) {
    if (q0.dot(q1) < 0.0) q1.coeffs() = -q1.coeffs();
    return q0.slerp(u, q1);
}

}  // namespace

PoseSequence resample(const PoseSequence& seq,
                      const NormalizationPolicy& policy) {
    seq.validate();
    policy.validate();

    const int N = policy.frame_count();
    const int F = static_cast<int>(seq.frames.size());
    const std::size_t J = seq.frames.front().rots.size();

    PoseSequence out;
    out.fps = policy.target_fps;
    out.skeleton_ref = seq.skeleton_ref;
    out.frames.reserve(N);

    for (int k = 0; k < N; ++k) {
        // Source frame position; endpoints land exactly on the first and
        // last source frames.
        double p = F == 1 ? 0.0
                          : static_cast<double>(k) * (F - 1) / (N - 1);
        int i = static_cast<int>(std::floor(p));
        if (i > F - 2) i = F - 2;
        if (i < 0) i = 0;
        double u = p - i;

        if (u <= 0.0 || F == 1) {
            out.frames.push_back(seq.frames[F == 1 ? 0 : i]);
            continue;
        }
        if (u >= 1.0) {
            out.frames.push_back(seq.frames[i + 1]);
            continue;
        }
        const Pose& a = seq.frames[i];
        const Pose& b = seq.frames[i + 1];
        Pose pose;
        pose.root_t = (1.0 - u) * a.root_t + u * b.root_t;
        pose.rots.reserve(J);
        for (std::size_t r = 0; r < J; ++r)
            pose.rots.push_back(slerp_shortest(a.rots[r], b.rots[r], u));
        out.frames.push_back(std::move(pose));
    }
    return out;
}

PoseSequence keypoints_to_pose(const KeypointSequence& kp,
                               const Skeleton& skeleton) {
    kp.validate();
    skeleton.validate();

    const int J = skeleton.joint_count();
    if (static_cast<int>(kp.frames.front().size()) != J)
        throw ValidationError("keypoint frames have " +
                              std::to_string(kp.frames.front().size()) +
                              " joints, skeleton has " + std::to_string(J));

    const auto children = skeleton.children();
    const int root = skeleton.root_index();

    PoseSequence out;
    out.fps = kp.fps;
    out.frames.reserve(kp.frames.size());

    for (std::size_t f = 0; f < kp.frames.size(); ++f) {
        const auto& points = kp.frames[f];
        Pose pose;
        pose.rots.assign(J, Eigen::Quaterniond::Identity());
        // The root joint sits at root_t + root offset after FK.
        pose.root_t = points[root] - skeleton.joints[root].offset;

        std::vector<Eigen::Quaterniond> world_rot(
            J, Eigen::Quaterniond::Identity());

        for (int j = 0; j < J; ++j) {
            const Eigen::Quaterniond parent_rot =
                skeleton.joints[j].parent ? world_rot[*skeleton.joints[j].parent]
                                          : Eigen::Quaterniond::Identity();
            const auto& kids = children[j];
            if (kids.empty()) {
                world_rot[j] = parent_rot;
                continue;
            }

            // Observed and canonical child-bone directions, both expressed
            // in the parent frame.
            std::vector<Eigen::Vector3d> observed, canonical;
            const Eigen::Quaterniond parent_inv = parent_rot.conjugate();
            for (int c : kids) {
                Eigen::Vector3d bone = points[c] - points[j];
                if (bone.norm() < 1e-6)
                    throw ValidationError(
                        "degenerate bone at joint \"" +
                        skeleton.joints[c].name + "\" in frame " +
                        std::to_string(f));
                observed.push_back((parent_inv * bone).normalized());
                canonical.push_back(skeleton.joints[c].offset.normalized());
            }

            Eigen::Quaterniond local;
            if (observed.size() == 1) {
                local = Eigen::Quaterniond::FromTwoVectors(canonical[0],
                                                           observed[0]);
            } else {
                // Orthogonal Procrustes over all child bones; with one bone
                // this would leave the twist free, with two or more it pins
                // the full rotation.
                Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
                for (std::size_t b = 0; b < observed.size(); ++b)
                    m += observed[b] * canonical[b].transpose();
                Eigen::JacobiSVD<Eigen::Matrix3d> svd(
                    m, Eigen::ComputeFullU | Eigen::ComputeFullV);
                Eigen::Matrix3d u = svd.matrixU();
                Eigen::Matrix3d v = svd.matrixV();
                Eigen::Vector3d d(1.0, 1.0,
                                  (u * v.transpose()).determinant() < 0.0
                                      ? -1.0
                                      : 1.0);
                local = Eigen::Quaterniond(
                    Eigen::Matrix3d(u * d.asDiagonal() * v.transpose()));
            }
            local.normalize();
            pose.rots[j] = local;
            world_rot[j] = parent_rot * local;
        }
        out.frames.push_back(std::move(pose));
    }
    return out;
}

}  // namespace synthact
