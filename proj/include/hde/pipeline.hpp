#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hde/config.hpp"
#include "hde/metrics.hpp"
#include "hde/predictions.hpp"
#include "hde/split.hpp"
#include "hde/stacking.hpp"
#include "hde/training.hpp"
#include "hde/weighted_avg.hpp"

namespace hde {

// Fusion shared by the full pipeline and fuse-only mode.

struct FusionModel {
    WeightFit weights;
    MetaFit meta;
    CombineRule rule = CombineRule::mean;
};

/// Fits alpha on (weight_x, weight_y) and the meta-learner on (meta_x, meta_y).
FusionModel fit_fusion(const PredictionMatrix& weight_x, std::span<const Label> weight_y,
                       const PredictionMatrix& meta_x, std::span<const Label> meta_y,
                       const RunConfig& config);

struct FusedScores {
    std::vector<double> weighted;
    std::vector<double> stacked;
    std::vector<double> hybrid;
};

FusedScores apply_fusion(const FusionModel& model, const PredictionMatrix& x);

// Reports.

struct ReportRow {
    std::string model;
    std::string kind;  // "base", "weighted", "stacked" or "hybrid"
    ModelMetrics metrics;
    std::string roc_file;  // relative to the output directory; empty if not written
};

struct ExplanationRecord {
    int class_id = 0;
    std::string sample_id;
    std::string stem;
};

struct RunReport {
    std::string experiment;
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::string evaluation_set;  // "test" or "holdout"
    std::string aggregation;
    std::size_t evaluated_units = 0;
    double threshold = 0.5;
    std::vector<ReportRow> rows;
    std::optional<FusionModel> fusion;
    std::string gradcam_model;
    std::vector<double> val_auc;  // per base learner; NaN when undefined
    std::vector<ExplanationRecord> explanations;
    std::vector<std::string> artifacts;  // relative paths
    std::vector<std::string> warnings;

    const ReportRow& row(const std::string& model) const;
};

nlohmann::json to_json(const RunReport& report);

/// Plain-text table with ACC/SEN/SPE in percent and AUC.
std::string render_table(const RunReport& report);

/// Writes report.json and report.txt and registers them as artifacts.
void write_report(const std::filesystem::path& out_dir, RunReport& report);

/// Row ids of a prediction table grouped into evaluation units.
struct Units {
    std::vector<std::string> ids;
    std::vector<Label> labels;
    std::vector<std::vector<std::size_t>> members;  // unit -> row positions
};

/// One unit per row (`slice`) or per subject (`subject_mean`), subjects in
/// ascending id order. Throws DataError if a subject's labels disagree.
Units group_units(std::span<const std::string> subject_of_row, std::span<const Label> labels,
                  Aggregation aggregation);

/// Mean of `scores` over each unit's rows.
std::vector<double> aggregate_scores(const Units& units, std::span<const double> scores);

/// Names used for base learner k in reports, checkpoints and ROC files.
std::string base_model_id(int k);

// Full Algorithm: split, base training, OOF, fusion, evaluation, explanation.

/// Everything produced up to and including out-of-fold predictions.
struct BaseStage {
    std::vector<LabeledSample> samples;
    std::vector<std::string> sample_ids;  // "<subject>_<slice>"
    DatasetSplit split;
    std::vector<std::unique_ptr<CnnLearner>> learners;
    PredictionMatrix val_predictions;
    PredictionMatrix test_predictions;
    FoldAssignment folds;
    OofTable oof;
    std::vector<std::string> artifacts;
};

/// Loads, splits, trains the K base learners, saves checkpoints and
/// prediction CSVs, and computes the OOF table (written as oof.csv).
BaseStage run_base_stage(const RunConfig& config, const std::filesystem::path& data_dir,
                         const std::filesystem::path& out_dir);

/// Runs every stage and writes the full output directory. A failing stage
/// throws with its name prefixed; files already written are kept.
RunReport run_pipeline(const RunConfig& config, const std::filesystem::path& data_dir,
                       const std::filesystem::path& out_dir);

/// Label-stratified split of table rows into (fit, evaluate) for fuse-only
/// mode; each class keeps at least one row on both sides when it has two.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fuse_holdout_rows(std::span<const Label> labels,
                                                                                double fit_fraction,
                                                                                std::uint64_t seed);

/// Fusion on externally produced probabilities: a label-stratified
/// `fuse_holdout` fraction of rows fits alpha and the meta-learner, the rest
/// is evaluated. Rows are their own evaluation units.
RunReport fuse_only(const PredictionTable& table, const RunConfig& config);

/// Writes weights.json, meta.json, ROC files and the report for fuse_only.
RunReport fuse_only(const PredictionTable& table, const RunConfig& config,
                    const std::filesystem::path& out_dir);

/// Metrics for every column of a prediction table, plus weighted, stacked and
/// hybrid rows when `fusion` is given. Rows are their own units.
RunReport evaluate_table(const PredictionTable& table, const std::optional<FusionModel>& fusion,
                         const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace hde
