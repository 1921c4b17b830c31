#include "hde/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "hde/errors.hpp"

namespace hde {

CombineRule parse_combine_rule(const std::string& name)
{
    if (name == "mean") return CombineRule::mean;
    if (name == "weighted_only") return CombineRule::weighted_only;
    if (name == "stacked_only") return CombineRule::stacked_only;
    throw ConfigError("unknown combine rule '" + name + "'");
}

std::string to_string(CombineRule rule)
{
    switch (rule) {
    case CombineRule::mean: return "mean";
    case CombineRule::weighted_only: return "weighted_only";
    case CombineRule::stacked_only: return "stacked_only";
    }
    return "?";
}

Aggregation parse_aggregation(const std::string& name)
{
    if (name == "slice") return Aggregation::slice;
    if (name == "subject_mean") return Aggregation::subject_mean;
    throw ConfigError("unknown aggregation '" + name + "'");
}

std::string to_string(Aggregation agg)
{
    return agg == Aggregation::slice ? "slice" : "subject_mean";
}

void RunConfig::validate() const
{
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(K >= 2, "K must be at least 2");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
    require(head_learning_rate > 0.0 && std::isfinite(head_learning_rate),
            "head_learning_rate must be positive");
    require(batch_size > 0, "batch_size must be positive");
    require(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout_rate must lie in [0,1)");
    require(threshold > 0.0 && threshold < 1.0, "threshold must lie in (0,1)");
    require(folds >= 2, "folds must be at least 2");
    require(freeze_epochs >= 0 && finetune_epochs >= 0, "epoch counts must be nonnegative");
    require(input_side > 0, "input_side must be positive");
    require(unfreeze_conv_layers >= 0, "unfreeze_conv_layers must be nonnegative");
    double sum = 0.0;
    for (double r : split_ratios) {
        require(r > 0.0, "split_ratios must be positive");
        sum += r;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "split_ratios must sum to 1");
    require(weight_steps >= 0, "weight_steps must be nonnegative");
    require(weight_step_size > 0.0, "weight_step_size must be positive");
    require(meta_epochs >= 0, "meta_epochs must be nonnegative");
    require(meta_learning_rate > 0.0, "meta_learning_rate must be positive");
    require(meta_l2 >= 0.0, "meta_l2 must be nonnegative");
    require(gradcam_model >= -1 && gradcam_model < K, "gradcam_model must be -1 or a base index");
    require(fuse_holdout > 0.0 && fuse_holdout < 1.0, "fuse_holdout must lie in (0,1)");
    require(threads >= 1, "threads must be at least 1");
    require(!experiment.empty(), "experiment name must not be empty");
}

void to_json(nlohmann::json& j, const RunConfig& c)
{
    j = nlohmann::json{
        {"K", c.K},
        {"seed", c.seed},
        {"learning_rate", c.learning_rate},
        {"head_learning_rate", c.head_learning_rate},
        {"batch_size", c.batch_size},
        {"dropout_rate", c.dropout_rate},
        {"threshold", c.threshold},
        {"folds", c.folds},
        {"freeze_epochs", c.freeze_epochs},
        {"finetune_epochs", c.finetune_epochs},
        {"input_side", c.input_side},
        {"unfreeze_conv_layers", c.unfreeze_conv_layers},
        {"fusion_combine_rule", to_string(c.fusion_combine_rule)},
        {"split_ratios", c.split_ratios},
        {"weight_steps", c.weight_steps},
        {"weight_step_size", c.weight_step_size},
        {"meta_epochs", c.meta_epochs},
        {"meta_learning_rate", c.meta_learning_rate},
        {"meta_l2", c.meta_l2},
        {"aggregation", to_string(c.aggregation)},
        {"roc_from_folds", c.roc_from_folds},
        {"gradcam_model", c.gradcam_model},
        {"fuse_holdout", c.fuse_holdout},
        {"threads", c.threads},
        {"experiment", c.experiment},
    };
}

void from_json(const nlohmann::json& j, RunConfig& c)
{
    if (!j.is_object()) throw ConfigError("run configuration must be a JSON object");
    nlohmann::json defaults;
    to_json(defaults, c);
    for (const auto& [key, value] : j.items()) {
        if (!defaults.contains(key)) throw ConfigError("unknown configuration key '" + key + "'");
    }
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        get("K", c.K);
        get("seed", c.seed);
        get("learning_rate", c.learning_rate);
        get("head_learning_rate", c.head_learning_rate);
        get("batch_size", c.batch_size);
        get("dropout_rate", c.dropout_rate);
        get("threshold", c.threshold);
        get("folds", c.folds);
        get("freeze_epochs", c.freeze_epochs);
        get("finetune_epochs", c.finetune_epochs);
        get("input_side", c.input_side);
        get("unfreeze_conv_layers", c.unfreeze_conv_layers);
        if (j.contains("fusion_combine_rule"))
            c.fusion_combine_rule = parse_combine_rule(j.at("fusion_combine_rule").get<std::string>());
        get("split_ratios", c.split_ratios);
        get("weight_steps", c.weight_steps);
        get("weight_step_size", c.weight_step_size);
        get("meta_epochs", c.meta_epochs);
        get("meta_learning_rate", c.meta_learning_rate);
        get("meta_l2", c.meta_l2);
        if (j.contains("aggregation"))
            c.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
        get("roc_from_folds", c.roc_from_folds);
        get("gradcam_model", c.gradcam_model);
        get("fuse_holdout", c.fuse_holdout);
        get("threads", c.threads);
        get("experiment", c.experiment);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad configuration value: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open configuration");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    RunConfig c;
    from_json(j, c);
    c.validate();
    return c;
}

}  // namespace hde
