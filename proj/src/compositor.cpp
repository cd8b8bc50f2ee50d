#include "synthact/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synthact/errors.hpp"
#include "synthact/parallel.hpp"

namespace synthact {

void PlacementPolicy::validate() const {
    auto in_range = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_range(ground_line) || !in_range(subject_height_frac) ||
        !in_range(horizontal_anchor))
        throw ValidationError("placement: fractions must be in (0, 1]");
}

namespace {

struct BBox {
    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -std::numeric_limits<double>::infinity();
    double y0 = std::numeric_limits<double>::infinity();
    double y1 = -std::numeric_limits<double>::infinity();

    bool empty() const { return x1 < x0; }
    void include(int x, int y) {
        x0 = std::min(x0, static_cast<double>(x));
        x1 = std::max(x1, static_cast<double>(x));
        y0 = std::min(y0, static_cast<double>(y));
        y1 = std::max(y1, static_cast<double>(y));
    }
    double center_x() const { return 0.5 * (x0 + x1); }
};

BBox alpha_bbox(const Image& frame) {
    BBox box;
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x)
            if (frame.at(x, y, 3) > 0.0) box.include(x, y);
    return box;
}

}  // namespace

std::vector<FrameTransform> plan_placement(
    const std::vector<Image>& frames, const Image& background,
    const PlacementPolicy& policy) {
    policy.validate();
    if (frames.empty())
        throw ValidationError("plan_placement: no frames");
    for (const Image& f : frames) {
        if (f.channels != 4)
            throw ValidationError("plan_placement: foreground must be RGBA");
        if (f.width != frames.front().width ||
            f.height != frames.front().height)
            throw ValidationError("plan_placement: frames must share one size");
    }

    std::vector<BBox> boxes(frames.size());
    BBox whole;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        boxes[f] = alpha_bbox(frames[f]);
        if (!boxes[f].empty()) {
            whole.include(static_cast<int>(boxes[f].x0),
                          static_cast<int>(boxes[f].y0));
            whole.include(static_cast<int>(boxes[f].x1),
                          static_cast<int>(boxes[f].y1));
        }
    }
    if (whole.empty())
        throw ValidationError("no foreground");

    const double bbox_height = whole.y1 - whole.y0 + 1.0;
    const double s = policy.subject_height_frac * background.height / bbox_height;
    const double anchor_x = policy.horizontal_anchor * background.width;
    const double ground_y = policy.ground_line * background.height;

    std::vector<FrameTransform> out(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const BBox& box = boxes[f].empty() ? whole : boxes[f];
        // Anchor the frame bbox bottom-center; drift follows the frame's
        // offset from the sequence-wide bbox center.
        const double target_x =
            anchor_x + s * (box.center_x() - whole.center_x());
        out[f].scale = s;
        out[f].translation =
            Eigen::Vector2d(target_x - s * box.center_x(),
                            ground_y - s * (box.y1 + 1.0));
    }
    return out;
}

Image composite_frame(const Image& fg, const Image& background,
                      const FrameTransform& xform) {
    if (!(xform.scale > 0.0))
        throw ValidationError("composite_frame: scale must be positive");
    if (fg.channels != 4)
        throw ValidationError("composite_frame: foreground must be RGBA");
    if (background.channels < 3)
        throw ValidationError("composite_frame: background must be RGB");

    Image out(background.width, background.height, 3);
    const double inv_s = 1.0 / xform.scale;

    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            // Bilinear sample of the transformed foreground; outside the
            // foreground raster the sample is fully transparent.
            const double fx = (x - xform.translation.x()) * inv_s;
            const double fy = (y - xform.translation.y()) * inv_s;
            double rgba[4] = {0.0, 0.0, 0.0, 0.0};
            const int ix = static_cast<int>(std::floor(fx));
            const int iy = static_cast<int>(std::floor(fy));
            const double ux = fx - ix;
            const double uy = fy - iy;
            for (int dy = 0; dy <= 1; ++dy) {
                for (int dx = 0; dx <= 1; ++dx) {
                    const int sx = ix + dx;
                    const int sy = iy + dy;
                    if (sx < 0 || sx >= fg.width || sy < 0 || sy >= fg.height)
                        continue;
                    const double wgt = (dx ? ux : 1.0 - ux) * (dy ? uy : 1.0 - uy);
                    if (wgt == 0.0) continue;
                    for (int c = 0; c < 4; ++c)
                        rgba[c] += wgt * fg.at(sx, sy, c);
                }
            }
            for (int c = 0; c < 3; ++c) {
                double v = rgba[c] + (1.0 - rgba[3]) * background.at(x, y, c);
                out.at(x, y, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return out;
}

std::vector<Image> composite_sequence(const std::vector<Image>& frames,
                                      const Image& background,
                                      const PlacementPolicy& policy,
                                      unsigned jobs) {
    const auto xforms = plan_placement(frames, background, policy);
    std::vector<Image> out(frames.size());
    parallel_for(frames.size(), jobs, [&](std::size_t f) {
        out[f] = composite_frame(frames[f], background, xforms[f]);
    });
    return out;
}

Image strip_background(const Image& fg, const Eigen::Vector3d& background) {
    if (fg.channels != 4)
        throw ValidationError("strip_background: expected RGBA input");
    Image out = fg;
    for (int y = 0; y < fg.height; ++y) {
        for (int x = 0; x < fg.width; ++x) {
            const double a = fg.at(x, y, 3);
            for (int c = 0; c < 3; ++c) {
                double v = fg.at(x, y, c) - background[c] * (1.0 - a);
                out.at(x, y, c) = std::clamp(v, 0.0, a);
            }
        }
    }
    return out;
}

}  // namespace synthact
