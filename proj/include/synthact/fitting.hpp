#pragma once

#include <utility>
#include <vector>

#include "synthact/core_model.hpp"
#include "synthact/image.hpp"
#include "synthact/renderer.hpp"

namespace synthact {

// Appearance-fitting target: posed frames of the identity being matched,
// all rendered/captured through one camera.
struct FitTarget {
    std::vector<std::pair<Pose, Framebuffer>> frames;
    Camera camera;

    void validate() const;
};

struct FitReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Mean squared RGB error between renders (over white) and targets, averaged
// over frames, pixels, and channels.
double photometric_loss(const Avatar& avatar, const FitTarget& target,
                        unsigned jobs = 0);

// With geometry and opacity fixed, the blended color is linear in splat
// colors; solves the ridge-regularized least-squares system per channel
// (ridge 1e-6, pulling toward the current colors) and clamps to [0, 1].
std::pair<Avatar, FitReport> fit_colors(const Avatar& avatar,
                                        const FitTarget& target,
                                        unsigned jobs = 0);

// Gradient descent on logit-opacities with central finite differences
// (h = 1e-3 in logit space) and Armijo backtracking from step 1.0.
std::pair<Avatar, FitReport> fit_opacities(const Avatar& avatar,
                                           const FitTarget& target, int steps,
                                           unsigned jobs = 0);

}  // namespace synthact
