#pragma once

#include "psb/dataset.hpp"
#include "psb/metrics.hpp"
#include "psb/selftrain.hpp"
#include "psb/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace psb {

enum class ScenarioPreset { Scenario1, Scenario2, Custom };

enum class DataSource { Synthetic, Csv };

/// CSV-backed experiment inputs. Feature columns f0..f{d-1} are detected
/// from each file's header and must agree across the four files.
struct CsvSource {
    std::string labeled;
    std::string unlabeled;
    std::string validation;
    std::string test;
    std::string label_column = "label";
    std::string group_column = "group";
    std::optional<std::string> audit_class_column;   // true class of unlabeled rows

    bool operator==(const CsvSource&) const = default;
};

struct ModelConfig {
    Eigen::Index hidden_dim = 32;

    bool operator==(const ModelConfig&) const = default;
};

struct ExperimentConfig {
    ScenarioPreset scenario = ScenarioPreset::Scenario1;
    std::uint64_t seed = 42;
    std::string out_dir;
    DataSource source = DataSource::Synthetic;
    ScenarioSpec synthetic;
    CsvSource csv;
    std::optional<SkewSpec> skew;       // unlabeled-pool distortion
    ModelConfig model;
    SelfTrainConfig selftrain;
    bool dump_pseudo_labels = false;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Comparison of several finished runs against the first one.
struct ComparisonRow {
    std::string run;
    double accuracy = 0.0;
    double selection_rate = 0.0;
    double gap_pp = 0.0;
    double d_accuracy = 0.0;
    double d_selection_rate = 0.0;
    double d_gap_pp = 0.0;
};

// ---------------------------------------------------------------------------
// Config file handling
// ---------------------------------------------------------------------------

/// Parses a JSON experiment config (or a run manifest, whose embedded config
/// echo is used instead). Unknown keys, type mismatches and constraint
/// violations are rejected with the offending path.
ExperimentConfig parse_config(const std::filesystem::path& path);

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config");

std::string write_config(const ExperimentConfig& config);

void validate_config(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Experiment pipeline
// ---------------------------------------------------------------------------

/// Builds the dataset bundle the config describes (generation or CSV load,
/// plus any unlabeled-pool skew).
DatasetBundle build_bundle(const ExperimentConfig& config);

/// End-to-end run: bundle, supervised baseline, self-training loop, and the
/// full run directory (manifest.json, iterations.csv, training_log.csv,
/// report.txt/json, series_*.dat). Streams iteration rows as they finish.
void run_experiment(const ExperimentConfig& config);

/// Writes a generated bundle as labeled/unlabeled/validation/test CSV files.
void generate_to_csv(const ExperimentConfig& config, const std::filesystem::path& out_dir);

std::vector<ComparisonRow> compare_runs(const std::vector<std::filesystem::path>& run_dirs);

std::string format_comparison(const std::vector<ComparisonRow>& rows);

/// Regenerates the plot series files from a run directory's iterations.csv.
/// series_accuracy.dat columns: iteration acc acc_class0 acc_class1 sr.
/// series_counts.dat columns: iteration n_selected n_balanced n_class0 n_class1.
void emit_plot_data(const std::filesystem::path& run_dir);

inline constexpr const char* kIterationsCsvHeader =
    "iteration,n_selected,n_balanced,n_class0,n_class1,val_acc,test_acc,"
    "test_acc_class0,test_acc_class1,selection_rate";

}  // namespace psb
