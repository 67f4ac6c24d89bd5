#include "psb/metrics.hpp"

#include <algorithm>
#include <set>

namespace psb {

double accuracy(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw DataError("accuracy: no records");
    long correct = 0;
    for (const auto& r : records)
        if (r.predicted_class == r.true_class) ++correct;
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

std::map<int, double> per_class_accuracy(const std::vector<PredictionRecord>& records) {
    std::map<int, long> total, correct;
    for (const auto& r : records) {
        ++total[r.true_class];
        if (r.predicted_class == r.true_class) ++correct[r.true_class];
    }
    std::map<int, double> acc;
    for (const auto& [cls, n] : total)
        acc[cls] = static_cast<double>(correct[cls]) / static_cast<double>(n);
    return acc;
}

namespace {

std::pair<double, double> acc_range(const std::map<int, double>& per_class_acc) {
    double lo = per_class_acc.begin()->second;
    double hi = lo;
    for (const auto& [cls, acc] : per_class_acc) {
        lo = std::min(lo, acc);
        hi = std::max(hi, acc);
    }
    return {lo, hi};
}

}  // namespace

double selection_rate(const std::map<int, double>& per_class_acc) {
    if (per_class_acc.size() < 2)
        throw DataError("selection_rate: needs at least 2 classes");
    const auto [lo, hi] = acc_range(per_class_acc);
    if (hi <= 0.0) throw DataError("selection_rate: max accuracy is 0, ratio undefined");
    return lo / hi;
}

bool passes_80_rule(double selection_rate) {
    return selection_rate >= 0.80;
}

namespace {

double gap_pp_of(const std::map<int, double>& per_class_acc) {
    const auto [lo, hi] = acc_range(per_class_acc);
    return (hi - lo) * 100.0;
}

}  // namespace

double gap_reduction(const FairnessReport& baseline, const FairnessReport& treated) {
    return baseline.gap_pp - treated.gap_pp;
}

GroupReport group_report(const std::vector<PredictionRecord>& records,
                         const std::string& group_attr) {
    std::vector<PredictionRecord> within;
    for (const auto& r : records)
        if (r.group.group_attr == group_attr) within.push_back(r);
    if (within.empty()) throw DataError("group_report: no records for group '" + group_attr + "'");

    GroupReport report;
    report.per_class_accuracy = per_class_accuracy(within);
    report.selection_rate = selection_rate(report.per_class_accuracy);
    return report;
}

FairnessReport make_report(const std::vector<PredictionRecord>& records) {
    FairnessReport report;
    report.overall_accuracy = accuracy(records);
    report.per_class_accuracy = per_class_accuracy(records);
    report.selection_rate = selection_rate(report.per_class_accuracy);
    report.gap_pp = gap_pp_of(report.per_class_accuracy);
    report.passes_80_rule = passes_80_rule(report.selection_rate);

    std::set<std::string> groups;
    for (const auto& r : records) groups.insert(r.group.group_attr);
    for (const auto& g : groups) {
        std::vector<PredictionRecord> within;
        for (const auto& r : records)
            if (r.group.group_attr == g) within.push_back(r);
        report.per_group_accuracy[g] = per_class_accuracy(within);
    }
    return report;
}

}  // namespace psb
