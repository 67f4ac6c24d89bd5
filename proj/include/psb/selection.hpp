#pragma once

#include "psb/learner.hpp"
#include "psb/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace psb {

/// Model prediction on one unlabeled sample, from its weakly augmented view.
struct PseudoLabel {
    std::string sample_id;
    int predicted_class = 0;
    double confidence = 0.0;   // max softmax probability

    bool operator==(const PseudoLabel&) const = default;
};

enum class ThresholdKind { Fixed, Curriculum };

/// Confidence gate for pseudo-label selection. Fixed keeps labels above a
/// constant epsilon; curriculum adapts a per-class threshold below
/// `base_threshold` from the class's learning status. `pseudo_balance`
/// additionally equalizes per-class counts after selection.
struct ThresholdPolicy {
    ThresholdKind kind = ThresholdKind::Fixed;
    double epsilon = 0.9;          // fixed kind
    double base_threshold = 0.95;  // curriculum kind
    bool pseudo_balance = true;

    bool operator==(const ThresholdPolicy&) const = default;
};

/// Per-class learning status: sigma counts confident predictions at the base
/// threshold, beta normalizes by the best class. When no prediction is
/// confident yet, every beta is 1 and thresholds stay at base (warm-up).
struct LearningStatus {
    std::array<long, kNumClasses> sigma{};
    std::array<double, kNumClasses> beta{};
};

/// Weakly augments each pool sample once and records the argmax prediction.
/// Argmax ties resolve to the lower class index.
std::vector<PseudoLabel> pseudo_label(const LearnerState& state, const std::vector<Sample>& pool,
                                      const AugmentConfig& aug, std::uint64_t seed);

/// Keeps labels with confidence strictly above epsilon; order preserved.
std::vector<PseudoLabel> select_fixed(const std::vector<PseudoLabel>& labels, double epsilon);

LearningStatus learning_status(const std::vector<PseudoLabel>& labels, double base_threshold);

/// Curriculum threshold for one class: base * beta / (2 - beta). Strictly
/// increasing on [0, 1], maps 0 to 0 and 1 to base.
double adjusted_threshold(double beta, double base_threshold);

/// Per-class thresholding with the status computed from the input itself.
std::vector<PseudoLabel> select_curriculum(const std::vector<PseudoLabel>& labels,
                                           double base_threshold);

/// Pseudo-balancing: subsamples so every class keeps exactly
/// min-per-class-count labels, uniformly at random within each class.
/// Reads only predicted classes, never group metadata.
std::vector<PseudoLabel> pseudo_balance(const std::vector<PseudoLabel>& labels, std::uint64_t seed);

/// Applies the policy's threshold rule (not the balancing step).
std::vector<PseudoLabel> select(const std::vector<PseudoLabel>& labels,
                                const ThresholdPolicy& policy);

}  // namespace psb
