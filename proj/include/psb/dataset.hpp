#pragma once

#include "psb/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace psb {

// (class, group) demographic cell.
using CellKey = std::pair<int, std::string>;

/// Gaussian-mixture generator config. Each (class, group) cell draws `counts`
/// samples from an isotropic Gaussian around its realized mean. Per-group
/// separability rescales the distance between the two class means of that
/// group about their midpoint, which is what makes one group harder to
/// classify than another.
struct SyntheticSpec {
    Eigen::Index feature_dim = 2;
    std::vector<std::string> groups;
    std::map<CellKey, long> counts;
    std::map<CellKey, Vector> means;
    double noise_scale = 1.0;
    std::map<std::string, double> separability;  // missing group -> 1.0
    std::string id_prefix = "syn";
};

/// Subsetting spec for a sample pool. `class_ratio` is the requested fraction
/// of class 1 in the output; `group_weights` weight per-group inclusion when
/// subsampling (empty map = all groups weight 1, missing entry = weight 0);
/// `intersection_only` restricts the pool to a single (class, group) cell.
struct SkewSpec {
    double class_ratio = 0.5;
    std::map<std::string, double> group_weights;
    std::optional<CellKey> intersection_only;

    bool operator==(const SkewSpec&) const = default;
};

/// Column layout of a CSV file. Feature columns are f0..f{d-1}. A missing
/// label column means the rows load as unlabeled samples; `class_column`
/// optionally carries the true class for evaluation-only audit.
struct CsvSchema {
    std::vector<std::string> feature_columns;
    std::optional<std::string> label_column;
    std::optional<std::string> class_column;
    std::string group_column = "group";
};

inline std::vector<std::string> feature_column_names(Eigen::Index dim) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) names.push_back("f" + std::to_string(i));
    return names;
}

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// Draws every cell of the spec. All samples come back labeled, in the
/// `labeled` partition of the bundle; scenario builders split and relabel.
/// Deterministic given (spec, seed).
DatasetBundle generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Largest subset of `pool` whose class-1 fraction matches spec.class_ratio
/// to within one sample. Selection within a class is weighted by group and
/// drawn without replacement; output preserves pool order.
std::vector<Sample> apply_skew(const std::vector<Sample>& pool, const SkewSpec& spec,
                               std::uint64_t seed);

/// Class-balanced test set: min-class-count samples of each class, picked
/// uniformly without replacement. Output preserves pool order.
std::vector<Sample> curate_balanced_test(const std::vector<Sample>& pool, std::uint64_t seed);

std::vector<Sample> load_csv(const std::filesystem::path& path, const CsvSchema& schema);

void save_csv(const std::filesystem::path& path, const std::vector<Sample>& samples,
              const CsvSchema& schema);

/// Copy with labels hidden (true class stays in group metadata for audit).
std::vector<Sample> as_unlabeled(std::vector<Sample> samples);

// ---------------------------------------------------------------------------
// Scenario builders
// ---------------------------------------------------------------------------

/// Synthetic stand-in for the paper's datasets. Two-group geometry: groups
/// sit apart along one axis, classes separate along another; the minority
/// group's class means are closer together (lower separability) and shifted
/// off-center, so a model trained mostly on the majority group misreads the
/// minority group's class boundary.
struct ScenarioSpec {
    Eigen::Index feature_dim = 6;
    std::vector<std::string> groups = {"majority", "minority"};
    double noise_scale = 1.0;
    std::map<std::string, double> separability = {{"majority", 4.0}, {"minority", 1.6}};
    std::map<std::string, double> class_shift = {{"majority", 0.0}, {"minority", -1.2}};
    double group_spacing = 3.0;   // distance between group centroids

    long n_labeled = 2000;
    double labeled_majority_frac = 0.95;  // share of groups[0] in the labeled set
    double labeled_class1_frac = 0.5;
    long n_unlabeled = 8000;              // balanced across cells before any skew
    long n_validation = 600;
    long n_test = 2400;
    double minority_frac = 0.8;           // minority share of validation/test pools

    bool operator==(const ScenarioSpec&) const = default;
};

/// Cell means/counts for one partition of a scenario. Exposed for tests.
SyntheticSpec scenario_cells(const ScenarioSpec& spec, const std::map<CellKey, long>& counts,
                             const std::string& id_prefix);

/// Scenario 1: majority-skewed labeled set, balanced unlabeled pool.
DatasetBundle build_scenario1(const ScenarioSpec& spec, std::uint64_t seed);

/// Scenario 2: balanced labeled set; the unlabeled pool is distorted by
/// `skew` after generation.
DatasetBundle build_scenario2(const ScenarioSpec& spec, const SkewSpec& skew, std::uint64_t seed);

}  // namespace psb
