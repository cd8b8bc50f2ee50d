#include "synthact/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "synthact/errors.hpp"
#include "synthact/parallel.hpp"
#include "synthact/rng.hpp"

namespace synthact {

void ExperimentConfig::validate() const {
    if (n_real < 0 || n_background < 0)
        throw ValidationError("experiment: counts must be >= 0");
    if (n_test < 1)
        throw ValidationError("experiment: n_test must be >= 1");
    if (classes.empty())
        throw ValidationError("experiment: classes must be non-empty");
    if (seeds.empty())
        throw ValidationError("experiment: seeds must be non-empty");
    for (std::size_t i = 1; i < curve_steps.size(); ++i)
        if (curve_steps[i] <= curve_steps[i - 1])
            throw ValidationError(
                "experiment: curve_steps must be strictly increasing");
}

namespace {

constexpr int kGridSize = 16;
constexpr int kPoolSize = 4;

// Area-averaged grayscale downsample to kGridSize x kGridSize.
Eigen::MatrixXd gray_grid(const Image& frame) {
    Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(kGridSize, kGridSize);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(kGridSize, kGridSize);
    for (int y = 0; y < frame.height; ++y) {
        const int gy = std::min(kGridSize - 1, y * kGridSize / frame.height);
        for (int x = 0; x < frame.width; ++x) {
            const int gx = std::min(kGridSize - 1, x * kGridSize / frame.width);
            const double gray = 0.299 * frame.at(x, y, 0) +
                                0.587 * frame.at(x, y, 1) +
                                0.114 * frame.at(x, y, 2);
            grid(gy, gx) += gray;
            counts(gy, gx) += 1.0;
        }
    }
    return grid.cwiseQuotient(counts.cwiseMax(1.0));
}

}  // namespace

Eigen::VectorXd extract_features(const std::vector<Image>& frames,
                                 int num_samples) {
    if (frames.size() < 2)
        throw ValidationError("extract_features: needs at least 2 frames");

    // Uniform endpoint-inclusive frame sampling.
    std::vector<Eigen::MatrixXd> grids;
    grids.reserve(num_samples);
    const int last = static_cast<int>(frames.size()) - 1;
    for (int s = 0; s < num_samples; ++s) {
        const int idx = static_cast<int>(std::lround(
            static_cast<double>(s) * last / (num_samples - 1)));
        grids.push_back(gray_grid(frames[idx]));
    }

    const int cell = kGridSize / kPoolSize;
    Eigen::VectorXd out((num_samples - 1) * kPoolSize * kPoolSize);
    int at = 0;
    for (int s = 1; s < num_samples; ++s) {
        const Eigen::MatrixXd diff = (grids[s] - grids[s - 1]).cwiseAbs();
        for (int py = 0; py < kPoolSize; ++py)
            for (int px = 0; px < kPoolSize; ++px)
                out[at++] =
                    diff.block(py * cell, px * cell, cell, cell).mean();
    }
    return out;
}

Eigen::VectorXd ClassifierModel::scores(const Eigen::VectorXd& features) const {
    Eigen::VectorXd z =
        (features - mean).cwiseQuotient(stddev);
    Eigen::VectorXd augmented(z.size() + 1);
    augmented << z, 1.0;
    return weights * augmented;
}

int ClassifierModel::predict(const Eigen::VectorXd& features) const {
    const Eigen::VectorXd s = scores(features);
    int best = 0;
    for (int c = 1; c < s.size(); ++c)
        if (s[c] > s[best]) best = c;   // ties keep the lowest index
    return best;
}

namespace {

// Row-wise softmax of the score matrix (N x C).
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
    Eigen::MatrixXd out = scores;
    for (int r = 0; r < out.rows(); ++r) {
        out.row(r).array() -= out.row(r).maxCoeff();
        out.row(r) = out.row(r).array().exp();
        out.row(r) /= out.row(r).sum();
    }
    return out;
}

Eigen::MatrixXd augment(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out(x.rows(), x.cols() + 1);
    out.leftCols(x.cols()) = x;
    out.col(x.cols()).setOnes();
    return out;
}

}  // namespace

double classifier_loss(const Eigen::MatrixXd& weights,
                       const Eigen::MatrixXd& standardized,
                       const std::vector<int>& labels, int num_classes,
                       double l2) {
    const Eigen::MatrixXd x = augment(standardized);
    const Eigen::MatrixXd probs = softmax_rows(x * weights.transpose());
    double loss = 0.0;
    for (int r = 0; r < x.rows(); ++r)
        loss -= std::log(std::max(probs(r, labels[r]), 1e-300));
    loss /= x.rows();
    // Bias column excluded from the penalty.
    loss += 0.5 * l2 *
            weights.leftCols(weights.cols() - 1).squaredNorm();
    (void)num_classes;
    return loss;
}

Eigen::MatrixXd classifier_gradient(const Eigen::MatrixXd& weights,
                                    const Eigen::MatrixXd& standardized,
                                    const std::vector<int>& labels,
                                    int num_classes, double l2) {
    const Eigen::MatrixXd x = augment(standardized);
    Eigen::MatrixXd probs = softmax_rows(x * weights.transpose());
    for (int r = 0; r < x.rows(); ++r) probs(r, labels[r]) -= 1.0;
    Eigen::MatrixXd grad = probs.transpose() * x / x.rows();
    grad.leftCols(grad.cols() - 1) +=
        l2 * weights.leftCols(weights.cols() - 1);
    (void)num_classes;
    return grad;
}

ClassifierModel train_classifier(const Eigen::MatrixXd& features,
                                 const std::vector<int>& labels,
                                 int num_classes, double lr, int epochs,
                                 double l2, std::uint64_t seed) {
    if (features.rows() == 0)
        throw ValidationError("train_classifier: empty training set");
    if (features.rows() != static_cast<Eigen::Index>(labels.size()))
        throw ValidationError("train_classifier: features/labels mismatch");
    std::vector<int> present(num_classes, 0);
    for (int y : labels) {
        if (y < 0 || y >= num_classes)
            throw ValidationError("train_classifier: label out of range");
        present[y] = 1;
    }

    const int d = static_cast<int>(features.cols());
    ClassifierModel model;
    model.mean = features.colwise().mean();
    Eigen::MatrixXd centered = features.rowwise() - model.mean.transpose();
    model.stddev =
        (centered.array().square().colwise().mean()).sqrt().transpose();
    for (int i = 0; i < d; ++i)
        if (model.stddev[i] <= 0.0) model.stddev[i] = 1.0;
    Eigen::MatrixXd z = centered.array().rowwise() /
                        model.stddev.transpose().array();

    // Small seeded init keeps runs reproducible and breaks symmetry.
    SplitMix64 rng(splitmix64_scramble(seed ^ 0x65766131ull));
    model.weights = Eigen::MatrixXd::Zero(num_classes, d + 1);
    for (int c = 0; c < num_classes; ++c)
        for (int i = 0; i < d + 1; ++i)
            model.weights(c, i) = 0.01 * rng.next_normal();

    double loss = classifier_loss(model.weights, z, labels, num_classes, l2);
    double rate = lr;
    int reductions = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const Eigen::MatrixXd grad =
            classifier_gradient(model.weights, z, labels, num_classes, l2);
        const Eigen::MatrixXd candidate = model.weights - rate * grad;
        const double candidate_loss =
            classifier_loss(candidate, z, labels, num_classes, l2);
        if (candidate_loss > loss + 1e-12) {
            // Fixed rate overshot; halve and retry this epoch.
            if (++reductions > 10) break;
            rate *= 0.5;
            --epoch;
            continue;
        }
        model.weights = candidate;
        loss = candidate_loss;
    }
    return model;
}

double evaluate(const ClassifierModel& model, const Eigen::MatrixXd& features,
                const std::vector<int>& labels) {
    if (features.rows() == 0)
        throw ValidationError("evaluate: empty test set");
    if (features.cols() + 1 != model.weights.cols())
        throw ValidationError("evaluate: feature dimension mismatch");
    int correct = 0;
    for (int r = 0; r < features.rows(); ++r)
        if (model.predict(features.row(r).transpose()) == labels[r]) ++correct;
    return static_cast<double>(correct) / features.rows();
}

std::vector<VideoSample> load_samples(const Manifest& manifest,
                                      const std::filesystem::path& root,
                                      unsigned jobs) {
    std::vector<const ManifestEntry*> entries;
    for (const ManifestEntry& e : manifest.entries)
        if (e.kind == "composited") entries.push_back(&e);

    std::vector<VideoSample> samples(entries.size());
    parallel_for(entries.size(), jobs, [&](std::size_t i) {
        const ManifestEntry& e = *entries[i];
        const auto frames = read_video_frames(root / e.frames_dir);
        samples[i] = {e.video_id, e.identity_id, e.class_label,
                      extract_features(frames)};
    });
    return samples;
}

namespace {

struct Split {
    Eigen::MatrixXd x;
    std::vector<int> y;
};

Split to_matrix(const std::vector<const VideoSample*>& samples,
                const std::map<std::string, int>& class_index) {
    Split out;
    if (samples.empty()) return out;
    out.x.resize(samples.size(), samples.front()->features.size());
    out.y.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out.x.row(i) = samples[i]->features.transpose();
        out.y.push_back(class_index.at(samples[i]->class_label));
    }
    return out;
}

// Seeded uniform pick of `count` samples per class, in a stable order.
std::vector<const VideoSample*> pick_per_class(
    const std::vector<const VideoSample*>& pool,
    const std::vector<std::string>& classes, int count, std::uint64_t seed) {
    std::vector<const VideoSample*> out;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::vector<const VideoSample*> members;
        for (const VideoSample* s : pool)
            if (s->class_label == classes[c]) members.push_back(s);
        if (static_cast<int>(members.size()) < count)
            throw ValidationError("insufficient pool for class \"" +
                                  classes[c] + "\": have " +
                                  std::to_string(members.size()) + ", need " +
                                  std::to_string(count));
        SplitMix64 rng(mix_seed(seed, 0x70696b63ull, c));
        for (int k = 0; k < count; ++k) {
            const std::size_t pick = k + rng.next_below(members.size() - k);
            std::swap(members[k], members[pick]);
            out.push_back(members[k]);
        }
    }
    return out;
}

void assert_split_hygiene(const std::vector<const VideoSample*>& train,
                          const std::vector<const VideoSample*>& test) {
    std::set<std::string> train_videos, train_identities;
    for (const VideoSample* s : train) {
        train_videos.insert(s->video_id);
        train_identities.insert(s->identity_id);
    }
    for (const VideoSample* s : test) {
        if (train_videos.count(s->video_id))
            throw ValidationError("split hygiene: video_id \"" + s->video_id +
                                  "\" appears in train and test");
        if (train_identities.count(s->identity_id))
            throw ValidationError("split hygiene: identity_id \"" +
                                  s->identity_id +
                                  "\" appears in train and test");
    }
}

struct PoolSplit {
    std::vector<const VideoSample*> train_pool;  // real, non-test identities
    std::vector<const VideoSample*> test_pool;   // real, test identities
};

PoolSplit split_real_pool(const ExperimentConfig& config,
                          const std::vector<VideoSample>& real_pool) {
    const std::set<std::string> test_ids(config.test_identities.begin(),
                                         config.test_identities.end());
    if (test_ids.empty())
        throw ValidationError("experiment: test_identities must be set");
    PoolSplit out;
    for (const VideoSample& s : real_pool)
        (test_ids.count(s.identity_id) ? out.test_pool : out.train_pool)
            .push_back(&s);
    return out;
}

std::map<std::string, int> index_classes(const ExperimentConfig& config) {
    std::map<std::string, int> out;
    for (std::size_t c = 0; c < config.classes.size(); ++c)
        out[config.classes[c]] = static_cast<int>(c);
    return out;
}

}  // namespace

std::vector<BaselineResult> run_baseline(
    const ExperimentConfig& config, const std::vector<VideoSample>& real_pool,
    const std::vector<VideoSample>& synth_pool) {
    config.validate();
    const auto class_index = index_classes(config);
    const PoolSplit pools = split_real_pool(config, real_pool);
    std::vector<const VideoSample*> synth_ptrs;
    for (const VideoSample& s : synth_pool) synth_ptrs.push_back(&s);

    const int num_classes = static_cast<int>(config.classes.size());
    std::vector<BaselineResult> results;
    for (std::uint64_t seed : config.seeds) {
        const auto real_train = pick_per_class(pools.train_pool,
                                               config.classes, config.n_real,
                                               mix_seed(seed, 1, 0));
        const auto synth_train =
            pick_per_class(synth_ptrs, config.classes, config.n_background,
                           mix_seed(seed, 2, 0));
        const auto test = pick_per_class(pools.test_pool, config.classes,
                                         config.n_test, mix_seed(seed, 3, 0));

        std::vector<const VideoSample*> both = real_train;
        both.insert(both.end(), synth_train.begin(), synth_train.end());
        assert_split_hygiene(both, test);

        const Split test_split = to_matrix(test, class_index);
        const Split real_split = to_matrix(real_train, class_index);
        const Split both_split = to_matrix(both, class_index);

        const ClassifierModel real_model = train_classifier(
            real_split.x, real_split.y, num_classes, 0.1, 500, 1e-4, seed);
        const ClassifierModel both_model = train_classifier(
            both_split.x, both_split.y, num_classes, 0.1, 500, 1e-4, seed);

        results.push_back({seed,
                           evaluate(real_model, test_split.x, test_split.y),
                           evaluate(both_model, test_split.x, test_split.y)});
    }
    return results;
}

std::vector<ShotCurveResult> run_shot_curve(
    const ExperimentConfig& config, const std::vector<VideoSample>& real_pool,
    const std::vector<VideoSample>& synth_pool) {
    config.validate();
    if (config.curve_steps.empty())
        throw ValidationError("experiment: curve_steps must be non-empty");
    const auto class_index = index_classes(config);
    const PoolSplit pools = split_real_pool(config, real_pool);
    std::vector<const VideoSample*> synth_ptrs;
    for (const VideoSample& s : synth_pool) synth_ptrs.push_back(&s);

    const int num_classes = static_cast<int>(config.classes.size());
    const int max_step = config.curve_steps.back();

    std::vector<ShotCurveResult> results;
    for (std::uint64_t seed : config.seeds) {
        // The shot sample is drawn once per seed and reused at every step.
        const auto real_train = pick_per_class(pools.train_pool,
                                               config.classes, config.n_real,
                                               mix_seed(seed, 1, 0));
        const auto synth_order =
            pick_per_class(synth_ptrs, config.classes, max_step,
                           mix_seed(seed, 2, 0));
        const auto test = pick_per_class(pools.test_pool, config.classes,
                                         config.n_test, mix_seed(seed, 3, 0));
        const Split test_split = to_matrix(test, class_index);

        ShotCurveResult result;
        result.seed = seed;
        for (int step : config.curve_steps) {
            std::vector<const VideoSample*> train = real_train;
            // synth_order holds max_step picks per class, class-major.
            for (std::size_t c = 0; c < config.classes.size(); ++c)
                for (int k = 0; k < step; ++k)
                    train.push_back(synth_order[c * max_step + k]);
            assert_split_hygiene(train, test);
            const Split split = to_matrix(train, class_index);
            const ClassifierModel model = train_classifier(
                split.x, split.y, num_classes, 0.1, 500, 1e-4, seed);
            result.accuracies.push_back(
                evaluate(model, test_split.x, test_split.y));
        }
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace synthact
