#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "synthact/dataset.hpp"
#include "synthact/image.hpp"

namespace synthact {

// Protocol knobs for the baseline and shot-curve experiments.
struct ExperimentConfig {
    int n_real = 0;             // real videos per class
    int n_background = 0;       // synthetic videos per class
    int n_test = 1;             // test videos per class
    std::vector<std::string> classes;
    std::vector<std::uint64_t> seeds;
    std::vector<int> curve_steps;
    // Identities whose real videos form the test pool; training pools must
    // not touch them.
    std::vector<std::string> test_identities;

    void validate() const;
};

// Handcrafted spatiotemporal descriptor: 16 uniformly sampled frames,
// grayscale, area-averaged to 16x16, 15 successive absolute differences
// pooled to 4x4 each, flattened (240 dims).
Eigen::VectorXd extract_features(const std::vector<Image>& frames,
                                 int num_samples = 16);

// Multinomial logistic regression with per-dim standardization, trained by
// full-batch gradient descent on cross-entropy + L2.
struct ClassifierModel {
    Eigen::MatrixXd weights;     // C x (D+1), last column is the bias
    Eigen::VectorXd mean;        // scaler, from the training set
    Eigen::VectorXd stddev;      // zero-variance dims get 1

    Eigen::VectorXd scores(const Eigen::VectorXd& features) const;
    int predict(const Eigen::VectorXd& features) const;
};

ClassifierModel train_classifier(const Eigen::MatrixXd& features,
                                 const std::vector<int>& labels,
                                 int num_classes, double lr = 0.1,
                                 int epochs = 500, double l2 = 1e-4,
                                 std::uint64_t seed = 0);

// Analytic gradient of the training objective at the given weights, exposed
// for finite-difference checking.
Eigen::MatrixXd classifier_gradient(const Eigen::MatrixXd& weights,
                                    const Eigen::MatrixXd& standardized,
                                    const std::vector<int>& labels,
                                    int num_classes, double l2);
double classifier_loss(const Eigen::MatrixXd& weights,
                       const Eigen::MatrixXd& standardized,
                       const std::vector<int>& labels, int num_classes,
                       double l2);

// Fraction of argmax-correct predictions; ties broken by lowest class index.
double evaluate(const ClassifierModel& model, const Eigen::MatrixXd& features,
                const std::vector<int>& labels);

// One labeled, feature-extracted video.
struct VideoSample {
    std::string video_id;
    std::string identity_id;
    std::string class_label;
    Eigen::VectorXd features;
};

// Loads composited videos from a manifest and extracts features in parallel.
std::vector<VideoSample> load_samples(const Manifest& manifest,
                                      const std::filesystem::path& root,
                                      unsigned jobs = 0);

struct BaselineResult {
    std::uint64_t seed = 0;
    double accuracy_real_only = 0.0;
    double accuracy_real_plus_synth = 0.0;
};

// Trains real-only and real+synthetic models on identical real samples and
// scores both on the same held-identity test set.
std::vector<BaselineResult> run_baseline(
    const ExperimentConfig& config, const std::vector<VideoSample>& real_pool,
    const std::vector<VideoSample>& synth_pool);

struct ShotCurveResult {
    std::uint64_t seed = 0;
    std::vector<double> accuracies;  // one per curve step
};

// One-/few-shot curve: the per-seed real sample is fixed across all curve
// steps; synthetic samples grow along a seeded order, so step sets nest.
std::vector<ShotCurveResult> run_shot_curve(
    const ExperimentConfig& config, const std::vector<VideoSample>& real_pool,
    const std::vector<VideoSample>& synth_pool);

}  // namespace synthact
