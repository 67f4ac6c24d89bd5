#include "psb/selftrain.hpp"

#include <unordered_map>
#include <utility>

namespace psb {

IterationOutcome run_iteration(const LearnerState& state, const DatasetBundle& bundle,
                               const SelfTrainConfig& config, std::uint64_t seed) {
    if (bundle.unlabeled.empty()) throw DataError("run_iteration: empty unlabeled pool");

    auto labels = pseudo_label(state, bundle.unlabeled, config.aug, derive_seed(seed, 1));

    IterationOutcome out;
    out.selected = select(labels, config.policy);
    auto kept_labels = config.policy.pseudo_balance
                           ? pseudo_balance(out.selected, derive_seed(seed, 2))
                           : out.selected;
    {
        std::unordered_map<std::string, long> kept_count;
        for (const PseudoLabel& l : kept_labels) ++kept_count[l.sample_id];
        out.kept.assign(out.selected.size(), 0);
        for (std::size_t i = 0; i < out.selected.size(); ++i) {
            auto it = kept_count.find(out.selected[i].sample_id);
            if (it != kept_count.end() && it->second > 0) {
                out.kept[i] = 1;
                --it->second;
            }
        }
    }

    IterationRecord& record = out.record;
    record.n_pseudo_selected = static_cast<long>(out.selected.size());
    record.n_pseudo_after_balance = static_cast<long>(kept_labels.size());
    for (const PseudoLabel& l : kept_labels)
        ++record.pseudo_class_counts[static_cast<std::size_t>(l.predicted_class)];

    // Training set: labeled set plus pseudo-labeled pool samples. Pseudo
    // examples carry only the predicted class; true labels and group
    // metadata stay out of the training path.
    std::unordered_map<std::string, const Sample*> by_id;
    by_id.reserve(bundle.unlabeled.size());
    for (const Sample& s : bundle.unlabeled) by_id[s.id] = &s;

    std::vector<TrainExample> train_set = to_examples(bundle.labeled);
    train_set.reserve(train_set.size() + kept_labels.size());
    const bool strong = config.variant == TrainingVariant::Consistency;
    for (const PseudoLabel& l : kept_labels) {
        auto it = by_id.find(l.sample_id);
        if (it == by_id.end())
            throw DataError("run_iteration: pseudo-label for unknown sample '" + l.sample_id + "'");
        train_set.push_back(TrainExample{it->second->features, l.predicted_class, strong});
    }

    const auto validation = to_examples(bundle.validation);
    auto result = train(state, train_set, validation, config.train, config.aug, derive_seed(seed, 3));

    record.test = make_report(evaluate(result.state, bundle.test));
    record.validation_accuracy = accuracy_on(result.state, validation);
    out.train_log = std::move(result.log);
    out.state = std::move(result.state);
    return out;
}

SelfTrainResult run_self_training(const LearnerState& initial, const DatasetBundle& bundle,
                                  const SelfTrainConfig& config, const IterationSink& on_iteration) {
    if (config.iterations < 1) throw ConfigError("self-training needs at least 1 iteration");

    SelfTrainResult result;
    result.final_state = initial;
    result.best_state = initial;
    double best_val = -1.0;

    for (int k = 1; k <= config.iterations; ++k) {
        auto outcome =
            run_iteration(result.final_state, bundle, config, iteration_seed(config.seed, k));
        outcome.record.iteration = k;
        result.final_state = std::move(outcome.state);
        if (outcome.record.validation_accuracy > best_val) {
            best_val = outcome.record.validation_accuracy;
            result.best_state = result.final_state;
            result.best_iteration = k;
        }
        if (on_iteration) on_iteration(outcome);
        result.records.push_back(std::move(outcome.record));
    }
    return result;
}

}  // namespace psb
