#pragma once

#include "psb/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace psb {

/// Accuracy and fairness summary over one set of prediction records.
/// gap_pp is the percentage-point spread between the best and worst class;
/// selection_rate is min/max of the per-class accuracies.
struct FairnessReport {
    double overall_accuracy = 0.0;
    std::map<int, double> per_class_accuracy;
    std::map<std::string, std::map<int, double>> per_group_accuracy;
    double selection_rate = 0.0;
    double gap_pp = 0.0;
    bool passes_80_rule = false;
};

/// Per-class accuracy and selection rate restricted to one group.
struct GroupReport {
    std::map<int, double> per_class_accuracy;
    double selection_rate = 0.0;
};

double accuracy(const std::vector<PredictionRecord>& records);

std::map<int, double> per_class_accuracy(const std::vector<PredictionRecord>& records);

/// Ratio of the minimum to the maximum per-class accuracy.
double selection_rate(const std::map<int, double>& per_class_acc);

/// The 80% rule: a selection rate of at least 0.80 counts as mitigated bias.
bool passes_80_rule(double selection_rate);

/// Positive when the treated run narrowed the accuracy gap, in pp.
double gap_reduction(const FairnessReport& baseline, const FairnessReport& treated);

GroupReport group_report(const std::vector<PredictionRecord>& records,
                         const std::string& group_attr);

FairnessReport make_report(const std::vector<PredictionRecord>& records);

}  // namespace psb
