#include "synthact/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthact/errors.hpp"
#include "synthact/parallel.hpp"

namespace synthact {

namespace {

constexpr double kRidge = 1e-6;
constexpr double kFdStep = 1e-3;       // logit space
constexpr double kArmijoC = 1e-4;
constexpr double kMinStep = 1e-12;
constexpr double kOpacityCap = 0.99;
constexpr double kAlphaCutoff = 1.0 / 255.0;
constexpr double kTransmittanceStop = 1e-4;

const Eigen::Vector3d kWhite(1.0, 1.0, 1.0);

double frame_mse(const Framebuffer& render, const Framebuffer& target) {
    double sum = 0.0;
    for (int y = 0; y < render.height; ++y)
        for (int x = 0; x < render.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const double d = render.at(x, y, c) - target.at(x, y, c);
                sum += d * d;
            }
    return sum / (static_cast<double>(render.width) * render.height * 3.0);
}

// Per-pixel blend weights w_{p,i} = alpha_i(p) * T_i(p) for each splat, plus
// the final transmittance, reproducing the rasterizer's front-to-back pass.
struct BlendWeights {
    // contributions[pixel] = list of (splat index, weight)
    std::vector<std::vector<std::pair<int, double>>> contributions;
    std::vector<double> transmittance;
};

BlendWeights blend_weights(const Avatar& avatar, const Pose& pose,
                           const Camera& cam) {
    const auto posed = skin_avatar(avatar, pose);
    struct Projected {
        int splat;
        Splat2D s2d;
    };
    std::vector<Projected> projected;
    for (std::size_t i = 0; i < posed.size(); ++i)
        if (auto p = project_splat(posed[i], cam))
            projected.push_back({static_cast<int>(i), *p});
    std::stable_sort(projected.begin(), projected.end(),
                     [](const Projected& a, const Projected& b) {
                         return a.s2d.depth < b.s2d.depth;
                     });

    const int w = cam.width;
    const int h = cam.height;
    BlendWeights out;
    out.contributions.resize(static_cast<std::size_t>(w) * h);
    out.transmittance.assign(static_cast<std::size_t>(w) * h, 1.0);

    for (const Projected& pr : projected) {
        const Splat2D& sp = pr.s2d;
        if (sp.opacity * kOpacityCap <= kAlphaCutoff) continue;
        const Eigen::Matrix2d inv = sp.cov.inverse();
        const double rs = std::sqrt(2.0 * std::log(sp.opacity / kAlphaCutoff));
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sp.cov);
        const double radius = rs * std::sqrt(eig.eigenvalues().maxCoeff());
        const int x0 = std::max(0, static_cast<int>(std::floor(sp.center.x() - radius)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(sp.center.x() + radius)));
        const int y0 = std::max(0, static_cast<int>(std::floor(sp.center.y() - radius)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(sp.center.y() + radius)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const std::size_t pix = static_cast<std::size_t>(y) * w + x;
                double& t = out.transmittance[pix];
                if (t < kTransmittanceStop) continue;
                const Eigen::Vector2d d(x - sp.center.x(), y - sp.center.y());
                double alpha = sp.opacity * std::exp(-0.5 * d.dot(inv * d));
                if (alpha < kAlphaCutoff) continue;
                if (alpha > kOpacityCap) alpha = kOpacityCap;
                out.contributions[pix].emplace_back(pr.splat, alpha * t);
                t *= 1.0 - alpha;
            }
        }
    }
    return out;
}

}  // namespace

void FitTarget::validate() const {
    camera.validate();
    if (frames.empty())
        throw ValidationError("fit target: needs at least one frame");
    for (const auto& [pose, fb] : frames) {
        (void)pose;
        if (fb.width != camera.width || fb.height != camera.height)
            throw ValidationError(
                "fit target: framebuffer size does not match camera");
    }
}

double photometric_loss(const Avatar& avatar, const FitTarget& target,
                        unsigned jobs) {
    target.validate();
    const std::size_t J = avatar.skeleton.joints.size();
    for (const auto& [pose, fb] : target.frames) {
        (void)fb;
        if (pose.rots.size() != J)
            throw ValidationError("fit target: pose does not match skeleton");
    }

    std::vector<double> per_frame(target.frames.size(), 0.0);
    parallel_for(target.frames.size(), jobs, [&](std::size_t f) {
        const auto& [pose, fb] = target.frames[f];
        per_frame[f] = frame_mse(render_pose(avatar, pose, target.camera, kWhite),
                                 fb);
    });
    return std::accumulate(per_frame.begin(), per_frame.end(), 0.0) /
           per_frame.size();
}

std::pair<Avatar, FitReport> fit_colors(const Avatar& avatar,
                                        const FitTarget& target,
                                        unsigned jobs) {
    target.validate();
    const int n = static_cast<int>(avatar.splats.size());

    // Normal equations accumulated over every frame and pixel. The blend
    // weights do not depend on colors, so one pass suffices.
    Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd atb = Eigen::MatrixXd::Zero(n, 3);

    std::vector<BlendWeights> weights(target.frames.size());
    parallel_for(target.frames.size(), jobs, [&](std::size_t f) {
        weights[f] = blend_weights(avatar, target.frames[f].first,
                                   target.camera);
    });

    for (std::size_t f = 0; f < target.frames.size(); ++f) {
        const Framebuffer& fb = target.frames[f].second;
        const BlendWeights& bw = weights[f];
        for (int y = 0; y < fb.height; ++y) {
            for (int x = 0; x < fb.width; ++x) {
                const std::size_t pix =
                    static_cast<std::size_t>(y) * fb.width + x;
                const auto& contribs = bw.contributions[pix];
                if (contribs.empty()) continue;
                const double t = bw.transmittance[pix];
                for (const auto& [i, wi] : contribs) {
                    for (const auto& [j, wj] : contribs)
                        ata(i, j) += wi * wj;
                    for (int c = 0; c < 3; ++c)
                        atb(i, c) += wi * (fb.at(x, y, c) - t);
                }
            }
        }
    }

    Eigen::MatrixXd init(n, 3);
    for (int i = 0; i < n; ++i) init.row(i) = avatar.splats[i].color;

    // Ridge pulls uncovered splats toward their current colors.
    ata += kRidge * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd rhs = atb + kRidge * init;
    Eigen::LDLT<Eigen::MatrixXd> solver(ata);
    if (solver.info() != Eigen::Success)
        throw std::logic_error("fit_colors: ridge system not positive definite");
    Eigen::MatrixXd solution = solver.solve(rhs);

    Avatar fitted = avatar;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c)
            fitted.splats[i].color[c] = std::clamp(solution(i, c), 0.0, 1.0);

    FitReport report;
    report.initial_loss = photometric_loss(avatar, target, jobs);
    report.final_loss = photometric_loss(fitted, target, jobs);
    report.iterations = 1;
    report.converged = true;
    if (report.final_loss > report.initial_loss) {
        // Clamping pushed past the unconstrained optimum; keep the input.
        fitted = avatar;
        report.final_loss = report.initial_loss;
        report.converged = false;
    }
    return {std::move(fitted), report};
}

namespace {

double logit(double p) {
    const double q = std::clamp(p, 1e-6, 1.0 - 1e-6);
    return std::log(q / (1.0 - q));
}

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

Avatar with_opacities(const Avatar& avatar, const Eigen::VectorXd& logits) {
    Avatar out = avatar;
    for (int i = 0; i < logits.size(); ++i)
        out.splats[i].opacity = sigmoid(logits[i]);
    return out;
}

}  // namespace

std::pair<Avatar, FitReport> fit_opacities(const Avatar& avatar,
                                           const FitTarget& target, int steps,
                                           unsigned jobs) {
    if (steps < 1)
        throw ValidationError("fit_opacities: steps must be >= 1");
    target.validate();

    const int n = static_cast<int>(avatar.splats.size());
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = logit(avatar.splats[i].opacity);

    auto loss_at = [&](const Eigen::VectorXd& logits) {
        return photometric_loss(with_opacities(avatar, logits), target, jobs);
    };

    FitReport report;
    double loss = loss_at(u);
    report.initial_loss = loss;
    report.converged = true;

    for (int step = 0; step < steps; ++step) {
        // Central finite differences in logit space.
        Eigen::VectorXd grad(n);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd up = u;
            Eigen::VectorXd down = u;
            up[i] += kFdStep;
            down[i] -= kFdStep;
            grad[i] = (loss_at(up) - loss_at(down)) / (2.0 * kFdStep);
        }
        const double g2 = grad.squaredNorm();
        if (g2 == 0.0) break;

        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= kMinStep) {
            Eigen::VectorXd candidate = u - alpha * grad;
            const double candidate_loss = loss_at(candidate);
            if (candidate_loss <= loss - kArmijoC * alpha * g2) {
                u = std::move(candidate);
                loss = candidate_loss;
                accepted = true;
                ++report.iterations;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            report.converged = false;
            break;
        }
    }

    report.final_loss = loss;
    return {with_opacities(avatar, u), report};
}

}  // namespace synthact
