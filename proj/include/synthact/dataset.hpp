#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "synthact/compositor.hpp"
#include "synthact/pose.hpp"
#include "synthact/renderer.hpp"

namespace synthact {

struct ReferenceEntry {
    std::string id;
    std::string class_label;
    std::filesystem::path pose_path;
};

struct IdentityEntry {
    std::string id;
    std::filesystem::path avatar_path;
};

// Generation plan: references x identities, g sampled backgrounds each.
struct DatasetSpec {
    std::vector<ReferenceEntry> references;
    std::vector<IdentityEntry> identities;
    std::vector<std::string> background_ids;       // sorted file stems
    std::filesystem::path background_dir;
    int g = 0;
    std::uint64_t seed = 0;
    NormalizationPolicy normalization;
    Camera camera;
    PlacementPolicy placement;
    std::filesystem::path output_root;

    void validate() const;
};

struct Job {
    enum class Kind { White, Composited };
    Kind kind;
    int reference;                  // index into spec.references
    int identity;                   // index into spec.identities
    int background_slot = -1;       // k in [0, g) for composited jobs
    std::string background_id;      // empty for white jobs
    std::string video_id;
};

// Exactly n_T * n_A white jobs plus n_T * n_A * g composited jobs, in
// lexicographic (reference, identity, background slot) order.
std::vector<Job> plan_jobs(const DatasetSpec& spec);

// g distinct background ids, drawn without replacement from a stream seeded
// by a split-mix of (spec.seed, i, j). Independent of call order.
std::vector<std::string> sample_backgrounds(const DatasetSpec& spec, int i,
                                            int j);

struct ManifestEntry {
    std::string video_id;
    std::string kind;               // "white" | "composited"
    std::string class_label;
    std::string reference_id;
    std::string identity_id;
    std::optional<std::string> background_id;
    std::string frames_dir;         // relative to the manifest's directory
    double fps = 0.0;
    int num_frames = 0;
    std::uint64_t seed = 0;
};

struct ManifestError {
    std::string video_id;
    std::string message;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    std::vector<ManifestError> errors;
};

// Runs the full plan: white videos are resampled, skinned, and rendered;
// composited videos reuse the white frames over sampled backgrounds.
// Per-job failures land in the manifest's error records without aborting
// the batch. Re-running with the same spec overwrites identical bytes.
Manifest generate(const DatasetSpec& spec, unsigned jobs = 0);

// JSON-lines, one entry per line, sorted by video_id, LF-terminated.
void write_manifest(const Manifest& manifest,
                    const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

// Per-video directory helpers (frame_%06d.png + meta.json).
void write_video_frames(const std::filesystem::path& dir,
                        const std::vector<Image>& frames, double fps);
std::vector<Image> read_video_frames(const std::filesystem::path& dir);

}  // namespace synthact
