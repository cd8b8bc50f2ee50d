#include "synthact/toybench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "synthact/errors.hpp"
#include "synthact/rng.hpp"

namespace synthact {

namespace {

using std::numbers::pi;

struct BoneSpec {
    const char* name;
    int parent;
    Eigen::Vector3d offset;
};

// Y-up rest pose, arms in a T, pelvis at the origin.
const BoneSpec kHumanoid[24] = {
    {"pelvis", -1, {0.0, 0.0, 0.0}},
    {"spine1", 0, {0.0, 0.12, 0.0}},
    {"spine2", 1, {0.0, 0.12, 0.0}},
    {"spine3", 2, {0.0, 0.12, 0.0}},
    {"neck", 3, {0.0, 0.12, 0.0}},
    {"head", 4, {0.0, 0.10, 0.0}},
    {"l_clavicle", 3, {0.06, 0.08, 0.0}},
    {"l_shoulder", 6, {0.12, 0.0, 0.0}},
    {"l_elbow", 7, {0.26, 0.0, 0.0}},
    {"l_wrist", 8, {0.24, 0.0, 0.0}},
    {"l_hand", 9, {0.09, 0.0, 0.0}},
    {"r_clavicle", 3, {-0.06, 0.08, 0.0}},
    {"r_shoulder", 11, {-0.12, 0.0, 0.0}},
    {"r_elbow", 12, {-0.26, 0.0, 0.0}},
    {"r_wrist", 13, {-0.24, 0.0, 0.0}},
    {"r_hand", 14, {-0.09, 0.0, 0.0}},
    {"l_hip", 0, {0.09, -0.06, 0.0}},
    {"l_knee", 16, {0.0, -0.40, 0.0}},
    {"l_ankle", 17, {0.0, -0.40, 0.0}},
    {"l_foot", 18, {0.0, -0.06, 0.12}},
    {"r_hip", 0, {-0.09, -0.06, 0.0}},
    {"r_knee", 20, {0.0, -0.40, 0.0}},
    {"r_ankle", 21, {0.0, -0.40, 0.0}},
    {"r_foot", 22, {0.0, -0.06, 0.12}},
};

enum HumanoidJoint {
    kPelvis = 0, kSpine1, kSpine2, kSpine3, kNeck, kHead,
    kLClavicle, kLShoulder, kLElbow, kLWrist, kLHand,
    kRClavicle, kRShoulder, kRElbow, kRWrist, kRHand,
    kLHip, kLKnee, kLAnkle, kLFoot,
    kRHip, kRKnee, kRAnkle, kRFoot,
};

double bone_radius(int child) {
    switch (child) {
        case kSpine1: case kSpine2: case kSpine3: return 0.085;
        case kNeck: return 0.045;
        case kHead: return 0.06;
        case kLClavicle: case kRClavicle: return 0.05;
        case kLShoulder: case kRShoulder:
        case kLElbow: case kRElbow: return 0.04;
        case kLWrist: case kRWrist:
        case kLHand: case kRHand: return 0.03;
        case kLHip: case kRHip: return 0.07;
        case kLKnee: case kRKnee:
        case kLAnkle: case kRAnkle: return 0.05;
        default: return 0.04;
    }
}

bool is_skin(int child) {
    switch (child) {
        case kHead: case kNeck:
        case kLWrist: case kRWrist:
        case kLHand: case kRHand: return true;
        default: return false;
    }
}

bool is_leg(int child) {
    return child >= kLHip;
}

Eigen::Vector3d clamp_color(const Eigen::Vector3d& c) {
    return c.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

Skeleton humanoid_skeleton() {
    Skeleton out;
    for (const BoneSpec& b : kHumanoid) {
        Joint j;
        j.name = b.name;
        j.parent = b.parent < 0 ? std::nullopt : std::optional<int>(b.parent);
        j.offset = b.offset;
        out.joints.push_back(std::move(j));
    }
    out.validate();
    return out;
}

Avatar make_humanoid_avatar(const std::string& id, std::uint64_t seed,
                            int splats_per_bone) {
    SplitMix64 rng(splitmix64_scramble(seed ^ 0x61766174ull));

    Avatar avatar;
    avatar.id = id;
    avatar.skeleton = humanoid_skeleton();

    // Mild per-identity proportion jitter.
    const double limb_scale = 0.92 + 0.16 * rng.next_double();
    for (Joint& j : avatar.skeleton.joints) j.offset *= limb_scale;

    const Eigen::Vector3d skin =
        clamp_color({0.35 + 0.55 * rng.next_double(),
                     0.25 + 0.45 * rng.next_double(),
                     0.18 + 0.35 * rng.next_double()});
    const Eigen::Vector3d shirt = clamp_color(
        {rng.next_double(), rng.next_double(), rng.next_double()});
    const Eigen::Vector3d pants = clamp_color(
        {rng.next_double(), rng.next_double(), rng.next_double()});

    const auto rest = forward_kinematics(avatar.skeleton,
                                         rest_pose(avatar.skeleton));

    for (int child = 0; child < avatar.skeleton.joint_count(); ++child) {
        if (!avatar.skeleton.joints[child].parent) continue;
        const int parent = *avatar.skeleton.joints[child].parent;
        const Eigen::Vector3d a = rest[parent].translation();
        const Eigen::Vector3d b = rest[child].translation();
        const double radius = bone_radius(child) * limb_scale;
        Eigen::Vector3d base =
            is_skin(child) ? skin : (is_leg(child) ? pants : shirt);

        for (int s = 0; s < splats_per_bone; ++s) {
            const double t = splats_per_bone == 1
                                 ? 0.5
                                 : static_cast<double>(s) /
                                       (splats_per_bone - 1);
            GaussianSplat g;
            g.mu = a + t * (b - a);
            // Slight positional scatter keeps the silhouette from looking
            // like beads on a string.
            g.mu += radius * 0.3 *
                    Eigen::Vector3d(rng.next_normal(), rng.next_normal(),
                                    rng.next_normal());
            g.scale = Eigen::Vector3d::Constant(radius);
            g.rot = Eigen::Quaterniond::Identity();
            g.color = clamp_color(
                base + 0.05 * Eigen::Vector3d(rng.next_normal(),
                                              rng.next_normal(),
                                              rng.next_normal()));
            g.opacity = 0.9;
            // The bone from parent to child follows the parent's rotation;
            // blend toward the child joint near the far end.
            if (t < 0.75) {
                g.weights = {{parent, 1.0}};
            } else {
                const double w = 0.5 * (t - 0.75) / 0.25;
                g.weights = {{parent, 1.0 - w}, {child, w}};
            }
            avatar.splats.push_back(std::move(g));
        }
    }

    // Head blob on top of the head joint.
    const Eigen::Vector3d head = rest[kHead].translation();
    for (int s = 0; s < 8; ++s) {
        GaussianSplat g;
        g.mu = head + 0.05 * limb_scale *
                          Eigen::Vector3d(rng.next_normal(),
                                          rng.next_normal(),
                                          rng.next_normal());
        g.scale = Eigen::Vector3d::Constant(0.055 * limb_scale);
        g.rot = Eigen::Quaterniond::Identity();
        g.color = clamp_color(skin + 0.04 * Eigen::Vector3d(rng.next_normal(),
                                                            rng.next_normal(),
                                                            rng.next_normal()));
        g.opacity = 0.9;
        g.weights = {{kNeck, 1.0}};
        avatar.splats.push_back(std::move(g));
    }

    avatar.validate();
    return avatar;
}

std::string scripted_motion_name(int motion) {
    static const char* names[kScriptedMotionCount] = {
        "wave", "squat", "jump", "bow", "spin", "kick", "clap", "march"};
    if (motion < 0 || motion >= kScriptedMotionCount)
        throw ValidationError("unknown scripted motion index");
    return names[motion];
}

namespace {

Eigen::Quaterniond axis_rot(const Eigen::Vector3d& axis, double degrees) {
    return Eigen::Quaterniond(
        Eigen::AngleAxisd(degrees * pi / 180.0, axis.normalized()));
}

const Eigen::Vector3d kX(1, 0, 0);
const Eigen::Vector3d kY(0, 1, 0);
const Eigen::Vector3d kZ(0, 0, 1);

// Smooth 0 -> 1 -> 0 bump over [0, 1].
double bump(double t) { return 0.5 * (1.0 - std::cos(2.0 * pi * t)); }

}  // namespace

PoseSequence scripted_motion(int motion, std::uint64_t variant_seed,
                             double seconds, double fps) {
    SplitMix64 rng(splitmix64_scramble(variant_seed ^ 0x6d6f7431ull));
    const double amp = 0.8 + 0.4 * rng.next_double();
    const double phase = 0.15 * rng.next_double();
    const double sway = 1.5 * rng.next_double();

    const Skeleton skeleton = humanoid_skeleton();
    const int frames = std::max(2, static_cast<int>(std::lround(seconds * fps)));

    PoseSequence seq;
    seq.fps = fps;
    seq.skeleton_ref = "humanoid24";
    seq.frames.reserve(frames);

    for (int f = 0; f < frames; ++f) {
        const double t = static_cast<double>(f) / (frames - 1) + phase;
        Pose pose = rest_pose(skeleton);
        // A touch of torso sway so no frame pair is ever static.
        pose.rots[kSpine2] = axis_rot(kZ, sway * std::sin(2.0 * pi * t));

        switch (motion) {
            case 0: {  // wave: right arm raised, forearm oscillating
                pose.rots[kRShoulder] = axis_rot(kZ, 65.0 * amp);
                pose.rots[kRElbow] =
                    axis_rot(kZ, 30.0 * amp * std::sin(2.0 * pi * 2.0 * t));
                break;
            }
            case 1: {  // squat
                const double s = amp * bump(t);
                pose.root_t.y() = -0.28 * s;
                for (int hip : {kLHip, kRHip})
                    pose.rots[hip] = axis_rot(kX, -55.0 * s);
                for (int knee : {kLKnee, kRKnee})
                    pose.rots[knee] = axis_rot(kX, 85.0 * s);
                for (int ankle : {kLAnkle, kRAnkle})
                    pose.rots[ankle] = axis_rot(kX, -30.0 * s);
                break;
            }
            case 2: {  // jump: two hops with arm swing
                const double s = std::abs(std::sin(2.0 * pi * 2.0 * t));
                pose.root_t.y() = 0.22 * amp * s;
                pose.rots[kLShoulder] = axis_rot(kZ, -50.0 * amp * s);
                pose.rots[kRShoulder] = axis_rot(kZ, 50.0 * amp * s);
                break;
            }
            case 3: {  // bow
                const double s = amp * bump(t);
                for (int spine : {kSpine1, kSpine2, kSpine3})
                    pose.rots[spine] = axis_rot(kX, 28.0 * s);
                pose.rots[kNeck] = axis_rot(kX, 12.0 * s);
                break;
            }
            case 4: {  // spin: full turn about the vertical axis
                pose.rots[kPelvis] = axis_rot(kY, 360.0 * (t - phase));
                pose.rots[kLElbow] = axis_rot(kZ, -20.0 * amp);
                pose.rots[kRElbow] = axis_rot(kZ, 20.0 * amp);
                break;
            }
            case 5: {  // kick with the right leg
                const double s = amp * bump(t);
                pose.rots[kRHip] = axis_rot(kX, -75.0 * s);
                pose.rots[kRKnee] = axis_rot(kX, 35.0 * s * (1.0 - s));
                pose.rots[kLShoulder] = axis_rot(kZ, -25.0 * s);
                break;
            }
            case 6: {  // clap: arms swing together in front
                const double s =
                    amp * 0.5 * (1.0 + std::sin(2.0 * pi * 2.0 * t));
                pose.rots[kLShoulder] = axis_rot(kY, 70.0 * s);
                pose.rots[kRShoulder] = axis_rot(kY, -70.0 * s);
                pose.rots[kLElbow] = axis_rot(kY, 25.0 * s);
                pose.rots[kRElbow] = axis_rot(kY, -25.0 * s);
                break;
            }
            case 7: {  // march in place
                const double s = amp * std::sin(2.0 * pi * 2.0 * t);
                pose.rots[kLHip] = axis_rot(kX, -40.0 * std::max(0.0, s));
                pose.rots[kRHip] = axis_rot(kX, -40.0 * std::max(0.0, -s));
                pose.rots[kLKnee] = axis_rot(kX, 50.0 * std::max(0.0, s));
                pose.rots[kRKnee] = axis_rot(kX, 50.0 * std::max(0.0, -s));
                pose.rots[kLShoulder] = axis_rot(kZ, -20.0 * std::max(0.0, -s));
                pose.rots[kRShoulder] = axis_rot(kZ, 20.0 * std::max(0.0, s));
                break;
            }
            default:
                throw ValidationError("unknown scripted motion index");
        }
        seq.frames.push_back(std::move(pose));
    }
    seq.validate();
    return seq;
}

Image make_background(std::uint64_t seed, int width, int height) {
    SplitMix64 rng(splitmix64_scramble(seed ^ 0x62676e64ull));
    const Eigen::Vector3d top(rng.next_double(), rng.next_double(),
                              rng.next_double());
    const Eigen::Vector3d bottom(rng.next_double(), rng.next_double(),
                                 rng.next_double());

    Image img(width, height, 3);
    for (int y = 0; y < height; ++y) {
        const double u = height == 1 ? 0.0 : static_cast<double>(y) / (height - 1);
        const Eigen::Vector3d row = (1.0 - u) * top + u * bottom;
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = row[c];
    }

    const int rects = 3 + static_cast<int>(rng.next_below(4));
    for (int r = 0; r < rects; ++r) {
        const int x0 = static_cast<int>(rng.next_below(width));
        const int y0 = static_cast<int>(rng.next_below(height));
        const int rw = 1 + static_cast<int>(rng.next_below(width / 2 + 1));
        const int rh = 1 + static_cast<int>(rng.next_below(height / 2 + 1));
        const Eigen::Vector3d color(rng.next_double(), rng.next_double(),
                                    rng.next_double());
        for (int y = y0; y < std::min(height, y0 + rh); ++y)
            for (int x = x0; x < std::min(width, x0 + rw); ++x)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
    }
    return img;
}

Camera default_camera(int width, int height) {
    Camera cam;
    cam.position = {0.0, -0.1, 3.2};
    // Camera space is right/down/forward; a half-turn about x points it
    // back along -z with image y matching gravity.
    cam.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(pi, kX));
    cam.focal = 1.5 * height;
    cam.principal = {0.5 * (width - 1), 0.5 * (height - 1)};
    cam.width = width;
    cam.height = height;
    return cam;
}

Camera jitter_camera(const Camera& cam, std::uint64_t seed) {
    SplitMix64 rng(splitmix64_scramble(seed ^ 0x63616d6aull));
    Camera out = cam;
    out.focal *= 1.0 + 0.06 * rng.next_normal();
    out.position += 0.05 * Eigen::Vector3d(rng.next_normal(),
                                           rng.next_normal(),
                                           rng.next_normal());
    const Eigen::Vector3d axis(rng.next_normal(), rng.next_normal(),
                               rng.next_normal());
    out.orientation =
        out.orientation *
        Eigen::Quaterniond(Eigen::AngleAxisd(0.03 * rng.next_normal(),
                                             axis.normalized()));
    out.orientation.normalize();
    return out;
}

namespace {

std::string class_of_reference_index(int index, int refs_per_class) {
    return scripted_motion_name(index / refs_per_class);
}

}  // namespace

ToyBenchmark build_toy_benchmark(const std::filesystem::path& root,
                                 const ToyBenchmarkOptions& options) {
    namespace fs = std::filesystem;
    fs::create_directories(root / "avatars");
    fs::create_directories(root / "poses");
    fs::create_directories(root / "backgrounds_train");
    fs::create_directories(root / "backgrounds_held");

    ToyBenchmark bench;
    bench.root = root;
    for (int m = 0; m < kScriptedMotionCount; ++m)
        bench.classes.push_back(scripted_motion_name(m));

    // References: scripted motions at a richer native rate than the clips.
    std::vector<ReferenceEntry> references;
    for (int m = 0; m < kScriptedMotionCount; ++m) {
        for (int v = 0; v < options.refs_per_class; ++v) {
            const std::string id =
                scripted_motion_name(m) + "_" + std::to_string(v);
            const fs::path path = root / "poses" / (id + ".json");
            save_pose_sequence(
                scripted_motion(m, mix_seed(options.seed, 101, m * 97 + v),
                                options.clip_seconds, 12.0),
                path);
            references.push_back({id, scripted_motion_name(m), path});
        }
    }

    auto write_avatars = [&](const std::string& prefix, int count,
                             std::uint64_t salt) {
        std::vector<IdentityEntry> out;
        for (int i = 0; i < count; ++i) {
            const std::string id = prefix + std::to_string(i);
            const fs::path path = root / "avatars" / (id + ".json");
            save_avatar(
                make_humanoid_avatar(id, mix_seed(options.seed, salt, i)),
                path);
            out.push_back({id, path});
        }
        return out;
    };
    const auto train_identities =
        write_avatars("train", options.train_identities, 201);
    const auto heldout_identities =
        write_avatars("held", options.heldout_identities, 202);
    for (int i = 1; i < options.heldout_identities; ++i)
        bench.test_identities.push_back(heldout_identities[i].id);

    auto write_backgrounds = [&](const fs::path& dir, int count,
                                 std::uint64_t salt) {
        std::vector<std::string> ids;
        for (int i = 0; i < count; ++i) {
            const std::string id = "bg" + std::to_string(i);
            write_png(dir / (id + ".png"),
                      make_background(mix_seed(options.seed, salt, i),
                                      options.resolution, options.resolution));
            ids.push_back(id);
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    const auto train_bgs = write_backgrounds(root / "backgrounds_train",
                                             options.train_backgrounds, 301);
    const auto held_bgs = write_backgrounds(root / "backgrounds_held",
                                            options.heldout_backgrounds, 302);

    const Camera camera =
        default_camera(options.resolution, options.resolution);
    NormalizationPolicy normalization{options.clip_seconds, options.clip_fps};
    PlacementPolicy placement;

    // Synthetic pool: training identities, train backgrounds, clean camera.
    DatasetSpec synth_spec;
    synth_spec.references = references;
    synth_spec.identities = train_identities;
    synth_spec.background_ids = train_bgs;
    synth_spec.background_dir = root / "backgrounds_train";
    synth_spec.g = options.g;
    synth_spec.seed = options.seed;
    synth_spec.normalization = normalization;
    synth_spec.camera = camera;
    synth_spec.placement = placement;
    synth_spec.output_root = root / "synth";
    const Manifest synth_manifest = generate(synth_spec, options.jobs);
    if (!synth_manifest.errors.empty())
        throw std::runtime_error("toy benchmark: synthetic generation failed: " +
                                 synth_manifest.errors.front().message);
    bench.synthetic_manifest = synth_spec.output_root / "manifest.jsonl";

    // Proxy-real pool: held-out identities and backgrounds, jittered
    // cameras. Several camera variants deepen the per-class pool.
    Manifest real_combined;
    for (int v = 0; v < options.real_camera_variants; ++v) {
        DatasetSpec real_spec = synth_spec;
        real_spec.identities = heldout_identities;
        real_spec.background_ids = held_bgs;
        real_spec.background_dir = root / "backgrounds_held";
        real_spec.g = 1;
        real_spec.seed = mix_seed(options.seed, 401, v);
        real_spec.camera = jitter_camera(camera, mix_seed(options.seed, 402, v));
        real_spec.output_root = root / ("real_v" + std::to_string(v));
        const Manifest m = generate(real_spec, options.jobs);
        if (!m.errors.empty())
            throw std::runtime_error("toy benchmark: real generation failed: " +
                                     m.errors.front().message);
        for (ManifestEntry e : m.entries) {
            e.frames_dir = "real_v" + std::to_string(v) + "/" + e.frames_dir;
            e.video_id = "v" + std::to_string(v) + "_" + e.video_id;
            real_combined.entries.push_back(std::move(e));
        }
    }
    bench.real_manifest = root / "real_manifest.jsonl";
    write_manifest(real_combined, bench.real_manifest);
    return bench;
}

}  // namespace synthact
