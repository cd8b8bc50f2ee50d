#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "synthact/compositor.hpp"
#include "synthact/dataset.hpp"
#include "synthact/eval.hpp"
#include "synthact/pose.hpp"
#include "synthact/renderer.hpp"

namespace synthact {

// Shared configuration file (JSON, "version": 1). Paths inside the dataset
// section are resolved against the avatars/poses directories.
struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path avatars_dir;
    std::filesystem::path poses_dir;
    std::filesystem::path backgrounds_dir;
    std::filesystem::path output_root;
    NormalizationPolicy identity_normalization{18.0, 18.0};
    NormalizationPolicy reference_normalization{20.0, 25.0};
    Camera camera;
    PlacementPolicy placement;
    int g = 0;
    std::vector<ReferenceEntry> references;
    std::vector<IdentityEntry> identities;
    std::optional<ExperimentConfig> experiment;
};

RunConfig load_run_config(const std::filesystem::path& path);

// Command-line entry point. Exit status: 0 success, 1 input error,
// 2 internal failure. Diagnostics go to stderr; outputs go to files under
// the configured output root only.
int dispatch(int argc, const char* const* argv);

}  // namespace synthact
