#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "synthact/core_model.hpp"
#include "synthact/dataset.hpp"
#include "synthact/eval.hpp"
#include "synthact/image.hpp"
#include "synthact/pose.hpp"
#include "synthact/renderer.hpp"

namespace synthact {

// Fixed 24-joint humanoid: pelvis root, three spine joints, neck, head, and
// per side clavicle/shoulder/elbow/wrist/hand and hip/knee/ankle/foot.
// Y-up, rest pose standing at the origin, ~1.7 m tall.
Skeleton humanoid_skeleton();

// Procedural identity: splats strung along the bones with seeded skin and
// clothing colors plus small proportion jitter.
Avatar make_humanoid_avatar(const std::string& id, std::uint64_t seed,
                            int splats_per_bone = 6);

// Scripted whole-body motions for the toy benchmark.
inline constexpr int kScriptedMotionCount = 8;
std::string scripted_motion_name(int motion);
PoseSequence scripted_motion(int motion, std::uint64_t variant_seed,
                             double seconds, double fps);

// Seeded procedural background (gradient plus rectangles).
Image make_background(std::uint64_t seed, int width, int height);

// Default camera framing the humanoid at the given resolution.
Camera default_camera(int width, int height);
// Seeded small perturbation of focal and orientation, used to give the
// proxy-real pool a domain gap.
Camera jitter_camera(const Camera& cam, std::uint64_t seed);

// Fully generated benchmark: synthetic pool (training identities, clean
// camera) and a proxy-real pool (held-out identities, held-out backgrounds,
// jittered cameras), both as manifests on disk.
struct ToyBenchmark {
    std::filesystem::path root;
    std::filesystem::path synthetic_manifest;
    std::filesystem::path real_manifest;
    std::vector<std::string> classes;
    std::vector<std::string> test_identities;  // subset of held-out identities
};

struct ToyBenchmarkOptions {
    std::uint64_t seed = 7;
    int resolution = 64;
    double clip_seconds = 2.0;
    double clip_fps = 8.0;
    int refs_per_class = 2;
    int train_identities = 10;
    int heldout_identities = 3;
    int train_backgrounds = 12;
    int heldout_backgrounds = 4;
    int g = 10;                   // backgrounds per (reference, identity)
    int real_camera_variants = 3;
    unsigned jobs = 0;
};

ToyBenchmark build_toy_benchmark(const std::filesystem::path& root,
                                 const ToyBenchmarkOptions& options);

}  // namespace synthact
