#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace hde {

enum class CombineRule { mean, weighted_only, stacked_only };
enum class Aggregation { slice, subject_mean };

CombineRule parse_combine_rule(const std::string& name);
std::string to_string(CombineRule rule);
Aggregation parse_aggregation(const std::string& name);
std::string to_string(Aggregation agg);

/// Every tunable of a run. JSON keys are the field names below.
struct RunConfig {
    int K = 3;                           // base-learner count
    std::uint64_t seed = 0;
    double learning_rate = 2e-5;         // fine-tuning (phase 2)
    double head_learning_rate = 3e-2;    // head-only training (phase 1)
    int batch_size = 24;
    double dropout_rate = 0.5;
    double threshold = 0.5;
    int folds = 10;
    int freeze_epochs = 60;
    int finetune_epochs = 10;
    int input_side = 224;
    int unfreeze_conv_layers = 1;        // trailing conv layers trained in phase 2
    CombineRule fusion_combine_rule = CombineRule::mean;
    std::array<double, 3> split_ratios = {0.6, 0.2, 0.2};

    int weight_steps = 500;
    double weight_step_size = 0.5;

    int meta_epochs = 2000;
    double meta_learning_rate = 1.0;
    double meta_l2 = 0.0;

    Aggregation aggregation = Aggregation::subject_mean;
    bool roc_from_folds = false;
    int gradcam_model = -1;              // -1: base learner with best validation AUC
    double fuse_holdout = 0.5;           // fraction of rows used to fit fusion in fuse-only mode
    int threads = 1;
    std::string experiment = "AD_vs_MCI";  // task label in reports; class 1 vs class 0

    /// Throws ConfigError when any field is out of range.
    void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Starts from defaults and overrides present keys; unknown keys are rejected.
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_config(const std::filesystem::path& path);

}  // namespace hde
