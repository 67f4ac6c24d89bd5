#pragma once

#include "psb/types.hpp"

#include <cstdint>
#include <vector>

namespace psb {

/// One-hidden-layer softmax classifier with SGD+momentum state. Stands in
/// for a large vision backbone: the self-training dynamics under study are
/// architecture-agnostic, and this keeps full runs desk-scale.
struct LearnerState {
    Matrix w1;        // hidden_dim x feature_dim
    Vector b1;        // hidden_dim
    Matrix w2;        // n_classes x hidden_dim
    Vector b2;        // n_classes
    Matrix v_w1;      // momentum buffers, same shapes
    Vector v_b1;
    Matrix v_w2;
    Vector v_b2;
    Eigen::Index feature_dim = 0;
    Eigen::Index hidden_dim = 0;
    int n_classes = kNumClasses;
    std::uint64_t rng_seed = 0;

    bool same_parameters(const LearnerState& other) const {
        return w1 == other.w1 && b1 == other.b1 && w2 == other.w2 && b2 == other.b2;
    }
};

struct TrainConfig {
    double learning_rate = 0.001;
    double momentum = 0.9;
    int batch_size = 16;
    int epochs_per_iteration = 10;
    int patience = 2;   // 0 disables early stopping

    bool operator==(const TrainConfig&) const = default;
};

struct AugmentConfig {
    double weak_noise_sigma = 0.05;
    double strong_noise_sigma = 0.2;
    double strong_mask_prob = 0.2;   // per-feature zeroing probability, strong mode only

    bool operator==(const AugmentConfig&) const = default;
};

enum class AugmentMode { Weak, Strong };

struct TrainExample {
    Vector features;
    int label = 0;
    bool strong_augment = false;   // re-perturbed by augment(strong) every epoch
};

struct EpochLog {
    int epoch = 0;               // 1-based
    double train_loss = 0.0;
    double val_accuracy = 0.0;   // NaN when no validation set
};

struct TrainResult {
    LearnerState state;          // best-validation checkpoint
    std::vector<EpochLog> log;
    int best_epoch = 0;          // 1-based; 0 when no epoch ran
};

/// Gradients of the mean cross-entropy loss, same shapes as the parameters.
struct Gradients {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
};

// Tracks "no improvement for `patience` consecutive epochs". Ties count as
// non-improvement; patience 0 never stops.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    /// Feeds one epoch's validation accuracy; returns true when training
    /// should halt after this epoch.
    bool feed(double accuracy) {
        ++epoch_;
        if (accuracy > best_) {
            best_ = accuracy;
            best_epoch_ = epoch_;
            stale_ = 0;
        } else {
            ++stale_;
        }
        return patience_ > 0 && stale_ >= patience_;
    }

    int best_epoch() const { return best_epoch_; }
    double best_accuracy() const { return best_; }

private:
    int patience_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    int stale_ = 0;
    double best_ = -1.0;
};

LearnerState init_learner(Eigen::Index feature_dim, Eigen::Index hidden_dim, std::uint64_t seed);

/// Class probabilities for one input, softmax over the network's logits.
Vector predict_proba(const LearnerState& state, const Vector& features);

Vector augment(const Vector& features, const AugmentConfig& config, AugmentMode mode,
               std::uint64_t seed);

/// Mean cross-entropy of the batch and its analytic gradients. Exposed so
/// the gradient check can finite-difference the same loss surface.
double batch_loss(const LearnerState& state, const std::vector<TrainExample>& batch);
Gradients batch_gradients(const LearnerState& state, const std::vector<TrainExample>& batch);

/// Minibatch SGD with momentum, per-epoch validation, early stopping, and
/// best-validation checkpointing. Examples flagged strong_augment are
/// re-augmented each epoch.
TrainResult train(const LearnerState& state, const std::vector<TrainExample>& labeled,
                  const std::vector<TrainExample>& validation, const TrainConfig& config,
                  const AugmentConfig& aug, std::uint64_t seed);

double accuracy_on(const LearnerState& state, const std::vector<TrainExample>& examples);

/// One record per labeled sample, order preserved.
std::vector<PredictionRecord> evaluate(const LearnerState& state, const std::vector<Sample>& samples);

std::vector<TrainExample> to_examples(const std::vector<Sample>& samples);

}  // namespace psb
