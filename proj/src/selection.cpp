#include "psb/selection.hpp"

#include "psb/rng.hpp"

#include <algorithm>
#include <cmath>

namespace psb {

namespace {

void check_unit_interval(double value, const char* name) {
    if (!(value > 0.0 && value < 1.0))
        throw ConfigError(std::string(name) + " must be in (0, 1)");
}

}  // namespace

std::vector<PseudoLabel> pseudo_label(const LearnerState& state, const std::vector<Sample>& pool,
                                      const AugmentConfig& aug, std::uint64_t seed) {
    std::vector<PseudoLabel> labels;
    labels.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const Vector view =
            augment(pool[i].features, aug, AugmentMode::Weak, derive_seed(seed, i));
        const Vector probs = predict_proba(state, view);
        PseudoLabel l;
        l.sample_id = pool[i].id;
        l.predicted_class = probs[1] > probs[0] ? 1 : 0;
        l.confidence = probs[l.predicted_class];
        labels.push_back(std::move(l));
    }
    return labels;
}

std::vector<PseudoLabel> select_fixed(const std::vector<PseudoLabel>& labels, double epsilon) {
    check_unit_interval(epsilon, "epsilon");
    std::vector<PseudoLabel> kept;
    for (const PseudoLabel& l : labels)
        if (l.confidence > epsilon) kept.push_back(l);
    return kept;
}

LearningStatus learning_status(const std::vector<PseudoLabel>& labels, double base_threshold) {
    check_unit_interval(base_threshold, "base_threshold");
    LearningStatus status;
    for (const PseudoLabel& l : labels)
        if (l.confidence > base_threshold) ++status.sigma[static_cast<std::size_t>(l.predicted_class)];

    const long top = *std::max_element(status.sigma.begin(), status.sigma.end());
    for (std::size_t c = 0; c < status.beta.size(); ++c)
        status.beta[c] = top == 0 ? 1.0 : static_cast<double>(status.sigma[c]) / static_cast<double>(top);
    return status;
}

double adjusted_threshold(double beta, double base_threshold) {
    return base_threshold * beta / (2.0 - beta);
}

std::vector<PseudoLabel> select_curriculum(const std::vector<PseudoLabel>& labels,
                                           double base_threshold) {
    const LearningStatus status = learning_status(labels, base_threshold);
    std::array<double, kNumClasses> threshold{};
    for (std::size_t c = 0; c < threshold.size(); ++c)
        threshold[c] = adjusted_threshold(status.beta[c], base_threshold);

    std::vector<PseudoLabel> kept;
    for (const PseudoLabel& l : labels)
        if (l.confidence > threshold[static_cast<std::size_t>(l.predicted_class)]) kept.push_back(l);
    return kept;
}

std::vector<PseudoLabel> pseudo_balance(const std::vector<PseudoLabel>& labels,
                                        std::uint64_t seed) {
    std::array<std::vector<std::size_t>, kNumClasses> byclass;
    for (std::size_t i = 0; i < labels.size(); ++i)
        byclass[static_cast<std::size_t>(labels[i].predicted_class)].push_back(i);

    std::size_t m = labels.size();
    for (const auto& indices : byclass) m = std::min(m, indices.size());

    std::vector<char> keep(labels.size(), 0);
    for (std::size_t c = 0; c < byclass.size(); ++c) {
        auto rng = make_rng(derive_seed(seed, c));
        for (std::size_t j : sample_without_replacement(byclass[c].size(), m, rng))
            keep[byclass[c][j]] = 1;
    }

    std::vector<PseudoLabel> balanced;
    balanced.reserve(kNumClasses * m);
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (keep[i]) balanced.push_back(labels[i]);
    return balanced;
}

std::vector<PseudoLabel> select(const std::vector<PseudoLabel>& labels,
                                const ThresholdPolicy& policy) {
    return policy.kind == ThresholdKind::Fixed ? select_fixed(labels, policy.epsilon)
                                               : select_curriculum(labels, policy.base_threshold);
}

}  // namespace psb
