#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace psb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Binary classification throughout: classes are 0 and 1.
inline constexpr int kNumClasses = 2;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or schema (CLI exit code 1).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed or inconsistent data at runtime (CLI exit code 2).
struct DataError : Error {
    using Error::Error;
};

// Non-finite loss or parameters during training (CLI exit code 2).
struct NumericalError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Demographic cell of a sample: its binary class plus a named subgroup.
/// Group metadata is only ever read by evaluation code, never by training.
struct GroupKey {
    int class_attr = 0;           // binary class identifier, 0 or 1
    std::string group_attr;       // subgroup category, from the dataset's declared list

    bool operator==(const GroupKey&) const = default;
};

/// One observation. `label` is absent for unlabeled pool samples; the true
/// class may still be carried in `group.class_attr` for evaluation-only audit.
struct Sample {
    std::string id;
    Vector features;
    std::optional<int> label;
    GroupKey group;
};

/// True class of a sample for evaluation purposes.
inline int audit_class(const Sample& s) {
    return s.label ? *s.label : s.group.class_attr;
}

/// Labeled set, unlabeled pool, validation and test partitions.
/// Partitions are disjoint by sample id.
struct DatasetBundle {
    std::vector<Sample> labeled;
    std::vector<Sample> unlabeled;
    std::vector<Sample> validation;
    std::vector<Sample> test;
    Eigen::Index feature_dim = 0;
    std::uint64_t seed = 0;

    std::size_t size() const {
        return labeled.size() + unlabeled.size() + validation.size() + test.size();
    }
};

/// Per-sample evaluation outcome, the substrate of the metrics module.
struct PredictionRecord {
    std::string sample_id;
    int true_class = 0;
    int predicted_class = 0;
    double confidence = 0.0;      // max softmax probability
    GroupKey group;
};

}  // namespace psb
