#pragma once

#include <Eigen/Dense>
#include <vector>

#include "synthact/image.hpp"

namespace synthact {

// Where the subject lands on the background: feet anchored to a ground
// line, a single sequence-wide scale, horizontal placement following the
// subject's own drift.
struct PlacementPolicy {
    double ground_line = 0.85;          // fraction of bg height
    double subject_height_frac = 0.6;   // fraction of bg height
    double horizontal_anchor = 0.5;     // fraction of bg width

    void validate() const;
};

struct FrameTransform {
    double scale = 1.0;
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();
};

// One uniform scale from the sequence-wide foreground bounding box, plus a
// per-frame translation that anchors each frame's bbox bottom-center on the
// ground line, with horizontal drift proportional to the frame's offset
// from the sequence-wide bbox center.
std::vector<FrameTransform> plan_placement(
    const std::vector<Image>& frames, const Image& background,
    const PlacementPolicy& policy);

// Source-over with premultiplied alpha; the foreground is resampled
// bilinearly, the background defines the output resolution and is never
// resampled. Output is opaque RGB.
Image composite_frame(const Image& fg, const Image& background,
                      const FrameTransform& xform);

std::vector<Image> composite_sequence(const std::vector<Image>& frames,
                                      const Image& background,
                                      const PlacementPolicy& policy,
                                      unsigned jobs = 0);

// Recovers a premultiplied foreground from a frame rendered over a uniform
// background color, using the stored alpha: rgb' = rgb - bg * (1 - a),
// clamped to [0, a] per channel.
Image strip_background(const Image& fg, const Eigen::Vector3d& background);

}  // namespace synthact
