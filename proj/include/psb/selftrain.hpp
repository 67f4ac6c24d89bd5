#pragma once

#include "psb/learner.hpp"
#include "psb/metrics.hpp"
#include "psb/rng.hpp"
#include "psb/selection.hpp"
#include "psb/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace psb {

enum class TrainingVariant {
    PlainRetrain,   // pseudo-labeled samples train on their clean features
    Consistency,    // pseudo-labeled samples are strongly augmented each epoch
};

struct SelfTrainConfig {
    int iterations = 7;
    ThresholdPolicy policy;
    TrainConfig train;
    AugmentConfig aug;
    TrainingVariant variant = TrainingVariant::Consistency;
    std::uint64_t seed = 0;

    bool operator==(const SelfTrainConfig&) const = default;
};

/// Everything captured about one pseudo-label/retrain cycle.
struct IterationRecord {
    int iteration = 0;                                   // 1-based
    long n_pseudo_selected = 0;
    long n_pseudo_after_balance = 0;
    std::array<long, kNumClasses> pseudo_class_counts{}; // after balancing
    FairnessReport test;
    double validation_accuracy = 0.0;
};

struct SelfTrainResult {
    std::vector<IterationRecord> records;
    LearnerState final_state;
    LearnerState best_state;   // by validation accuracy
    int best_iteration = 0;
};

/// Seed for iteration k of a run, mixed from the master seed.
constexpr std::uint64_t iteration_seed(std::uint64_t master_seed, int iteration) {
    return splitmix64(master_seed + static_cast<std::uint64_t>(iteration));
}

struct IterationOutcome {
    LearnerState state;
    IterationRecord record;
    std::vector<EpochLog> train_log;
    std::vector<PseudoLabel> selected;   // post-threshold, pre-balance
    std::vector<char> kept;              // per selected label: survived balancing
};

/// One cycle: pseudo-label the pool, select by policy, optionally balance,
/// retrain on labeled + pseudo-labeled, evaluate on the test partition.
/// An empty post-selection set is not an error; the cycle retrains on the
/// labeled set alone and records zero pseudo counts.
IterationOutcome run_iteration(const LearnerState& state, const DatasetBundle& bundle,
                               const SelfTrainConfig& config, std::uint64_t seed);

using IterationSink = std::function<void(const IterationOutcome&)>;

/// Runs config.iterations cycles, threading the learner state. `on_iteration`
/// (optional) receives each outcome as it completes, so partial progress
/// survives a numerical failure.
SelfTrainResult run_self_training(const LearnerState& initial, const DatasetBundle& bundle,
                                  const SelfTrainConfig& config,
                                  const IterationSink& on_iteration = nullptr);

}  // namespace psb
