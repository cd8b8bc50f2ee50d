#include "synthact/core_model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "synthact/errors.hpp"

namespace synthact {

using jsonutil::json;

int Skeleton::root_index() const {
    for (int j = 0; j < joint_count(); ++j)
        if (!joints[j].parent) return j;
    throw ValidationError("skeleton has no root joint");
}

std::vector<std::vector<int>> Skeleton::children() const {
    std::vector<std::vector<int>> out(joints.size());
    for (int j = 0; j < joint_count(); ++j)
        if (joints[j].parent) out[*joints[j].parent].push_back(j);
    return out;
}

void Skeleton::validate() const {
    if (joint_count() < 2)
        throw ValidationError("skeleton.joints: joint count must be >= 2");
    int roots = 0;
    std::set<std::string> names;
    for (int j = 0; j < joint_count(); ++j) {
        const Joint& joint = joints[j];
        const std::string path = "skeleton.joints[" + std::to_string(j) + "]";
        if (!names.insert(joint.name).second)
            throw ValidationError(path + ".name: duplicate name \"" +
                                  joint.name + "\"");
        if (!joint.parent) {
            ++roots;
        } else {
            if (*joint.parent < 0 || *joint.parent >= j)
                throw ValidationError(path +
                                      ".parent: must be a lower joint index");
        }
        if (!joint.offset.allFinite())
            throw ValidationError(path + ".offset: non-finite value");
    }
    if (roots != 1)
        throw ValidationError("skeleton.joints: expected exactly one root, got " +
                              std::to_string(roots));
}

void Avatar::validate() const {
    skeleton.validate();
    if (splats.empty())
        throw ValidationError("splats: splat count must be >= 1");
    const int J = skeleton.joint_count();
    for (std::size_t s = 0; s < splats.size(); ++s) {
        const GaussianSplat& g = splats[s];
        const std::string path = "splats[" + std::to_string(s) + "]";
        for (int a = 0; a < 3; ++a) {
            if (!(g.scale[a] >= 1e-5 && g.scale[a] <= 10.0))
                throw ValidationError(path + ".scale: component out of range "
                                             "[1e-5, 10]");
            if (!(g.color[a] >= 0.0 && g.color[a] <= 1.0))
                throw ValidationError(path + ".color: component out of range");
        }
        if (!(g.opacity >= 0.0 && g.opacity <= 1.0))
            throw ValidationError(path + ".opacity: opacity out of range");
        if (std::abs(g.rot.norm() - 1.0) > 1e-6)
            throw ValidationError(path + ".rot: quaternion not unit");
        if (g.weights.empty() || g.weights.size() > 4)
            throw ValidationError(path + ".weights: expected 1..4 entries");
        double sum = 0.0;
        for (std::size_t w = 0; w < g.weights.size(); ++w) {
            const SplatWeight& sw = g.weights[w];
            if (sw.joint < 0 || sw.joint >= J)
                throw ValidationError(path + ".weights[" + std::to_string(w) +
                                      "]: joint index out of range");
            if (sw.weight < 0.0)
                throw ValidationError(path + ".weights[" + std::to_string(w) +
                                      "]: negative weight");
            sum += sw.weight;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError(path + ".weights: weights sum to " +
                                  std::to_string(sum) + ", expected 1");
    }
}

Pose rest_pose(const Skeleton& skeleton) {
    Pose pose;
    pose.root_t = Eigen::Vector3d::Zero();
    pose.rots.assign(skeleton.joints.size(),
                     Eigen::Quaterniond::Identity());
    return pose;
}

std::vector<Eigen::Isometry3d> forward_kinematics(const Skeleton& skeleton,
                                                  const Pose& pose) {
    const int J = skeleton.joint_count();
    if (static_cast<int>(pose.rots.size()) != J)
        throw ValidationError("pose has " + std::to_string(pose.rots.size()) +
                              " rotations for a " + std::to_string(J) +
                              "-joint skeleton");

    std::vector<Eigen::Isometry3d> world(J);
    for (int j = 0; j < J; ++j) {
        Eigen::Isometry3d local = Eigen::Isometry3d::Identity();
        local.translate(skeleton.joints[j].offset);
        local.rotate(pose.rots[j]);
        if (skeleton.joints[j].parent) {
            world[j] = world[*skeleton.joints[j].parent] * local;
        } else {
            world[j] = Eigen::Translation3d(pose.root_t) * local;
        }
    }
    return world;
}

std::vector<PosedSplat> skin_avatar(const Avatar& avatar, const Pose& pose) {
    const auto world = forward_kinematics(avatar.skeleton, pose);
    const auto rest = forward_kinematics(avatar.skeleton,
                                         rest_pose(avatar.skeleton));

    // Per-joint skinning transform: world * inverse(rest world).
    std::vector<Eigen::Isometry3d> skin(world.size());
    for (std::size_t j = 0; j < world.size(); ++j)
        skin[j] = world[j] * rest[j].inverse();

    std::vector<PosedSplat> out;
    out.reserve(avatar.splats.size());
    for (const GaussianSplat& g : avatar.splats) {
        Eigen::Vector3d mu = Eigen::Vector3d::Zero();
        int dominant = g.weights.front().joint;
        double best = g.weights.front().weight;
        for (const SplatWeight& sw : g.weights) {
            mu += sw.weight * (skin[sw.joint] * g.mu);
            if (sw.weight > best ||
                (sw.weight == best && sw.joint < dominant)) {
                best = sw.weight;
                dominant = sw.joint;
            }
        }
        Eigen::Quaterniond rot =
            Eigen::Quaterniond(skin[dominant].rotation()) * g.rot;
        rot.normalize();
        out.push_back({mu, g.scale, rot, g.color, g.opacity});
    }
    return out;
}

namespace {

Skeleton skeleton_from_json(const json& j, const std::string& path) {
    jsonutil::expect_keys(j, {"joints"}, path);
    const json& joints = j.at("joints");
    if (!joints.is_array())
        throw ValidationError(path + ".joints: expected an array");
    Skeleton skeleton;
    for (std::size_t i = 0; i < joints.size(); ++i) {
        const std::string jp = path + ".joints[" + std::to_string(i) + "]";
        jsonutil::expect_keys(joints[i], {"name", "parent", "offset"}, jp);
        Joint joint;
        joint.name = jsonutil::get_string(joints[i].at("name"), jp + ".name");
        const json& parent = joints[i].at("parent");
        if (parent.is_null()) {
            joint.parent = std::nullopt;
        } else if (parent.is_number_integer()) {
            joint.parent = parent.get<int>();
        } else {
            throw ValidationError(jp + ".parent: expected an index or null");
        }
        joint.offset = jsonutil::get_vec3(joints[i].at("offset"), jp + ".offset");
        skeleton.joints.push_back(std::move(joint));
    }
    return skeleton;
}

GaussianSplat splat_from_json(const json& j, const std::string& path) {
    jsonutil::expect_keys(
        j, {"mu", "scale", "rot", "color", "opacity", "weights"}, path);
    GaussianSplat g;
    g.mu = jsonutil::get_vec3(j.at("mu"), path + ".mu");
    g.scale = jsonutil::get_vec3(j.at("scale"), path + ".scale");
    g.rot = jsonutil::get_unit_quat(j.at("rot"), path + ".rot");
    g.color = jsonutil::get_vec3(j.at("color"), path + ".color");
    g.opacity = jsonutil::get_number(j.at("opacity"), path + ".opacity");
    const json& weights = j.at("weights");
    if (!weights.is_array())
        throw ValidationError(path + ".weights: expected an array");
    for (std::size_t w = 0; w < weights.size(); ++w) {
        const std::string wp = path + ".weights[" + std::to_string(w) + "]";
        const json& pair = weights[w];
        if (!pair.is_array() || pair.size() != 2)
            throw ValidationError(wp + ": expected [joint, weight]");
        if (!pair[0].is_number_integer())
            throw ValidationError(wp + "[0]: expected a joint index");
        g.weights.push_back(
            {pair[0].get<int>(), jsonutil::get_number(pair[1], wp + "[1]")});
    }
    // Tolerate serialization rounding in the weight partition.
    double sum = 0.0;
    for (const SplatWeight& sw : g.weights) sum += sw.weight;
    if (std::abs(sum - 1.0) <= 1e-6 && sum > 0.0)
        for (SplatWeight& sw : g.weights) sw.weight /= sum;
    return g;
}

}  // namespace

Avatar build_avatar_from_spec(const std::string& document) {
    json j = jsonutil::parse(document, "avatar document");
    jsonutil::expect_keys(j, {"version", "id", "skeleton", "splats"}, "avatar");
    jsonutil::expect_version(j, "avatar");

    Avatar avatar;
    avatar.id = jsonutil::get_string(j.at("id"), "avatar.id");
    avatar.skeleton = skeleton_from_json(j.at("skeleton"), "skeleton");
    const json& splats = j.at("splats");
    if (!splats.is_array())
        throw ValidationError("splats: expected an array");
    for (std::size_t s = 0; s < splats.size(); ++s)
        avatar.splats.push_back(
            splat_from_json(splats[s], "splats[" + std::to_string(s) + "]"));

    avatar.validate();
    return avatar;
}

Avatar load_avatar(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open avatar file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return build_avatar_from_spec(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void save_avatar(const Avatar& avatar, const std::filesystem::path& path) {
    json joints = json::array();
    for (const Joint& joint : avatar.skeleton.joints) {
        json j;
        j["name"] = joint.name;
        j["parent"] = joint.parent ? json(*joint.parent) : json(nullptr);
        j["offset"] = jsonutil::vec3_to_json(joint.offset);
        joints.push_back(std::move(j));
    }
    json splats = json::array();
    for (const GaussianSplat& g : avatar.splats) {
        json s;
        s["mu"] = jsonutil::vec3_to_json(g.mu);
        s["scale"] = jsonutil::vec3_to_json(g.scale);
        s["rot"] = jsonutil::quat_to_json(g.rot);
        s["color"] = jsonutil::vec3_to_json(g.color);
        s["opacity"] = g.opacity;
        json weights = json::array();
        for (const SplatWeight& sw : g.weights)
            weights.push_back(json::array({sw.joint, sw.weight}));
        s["weights"] = std::move(weights);
        splats.push_back(std::move(s));
    }
    json doc;
    doc["version"] = 1;
    doc["id"] = avatar.id;
    doc["skeleton"] = json{{"joints", std::move(joints)}};
    doc["splats"] = std::move(splats);
    jsonutil::write_file(path, doc);
}

}  // namespace synthact
