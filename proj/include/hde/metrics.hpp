#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hde/types.hpp"

namespace hde {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Accuracy is always defined for a nonempty matrix; sensitivity and
/// specificity are empty when their class has no samples.
struct Rates {
    double accuracy = 0.0;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

/// Ordered from (0,0) to (1,1), both coordinates nondecreasing.
struct RocCurve {
    std::vector<RocPoint> points;
};

/// 1 iff p > tau (ties classify negative).
constexpr Label threshold(double p, double tau)
{
    return p > tau ? Label::positive : Label::negative;
}

std::vector<Label> threshold_all(std::span<const double> probs, double tau);

ConfusionMatrix confusion(std::span<const Label> labels, std::span<const Label> predictions);

Rates acc_sen_spe(const ConfusionMatrix& cm);

/// One point per distinct score (equal scores form a single step) plus the
/// (0,0) origin. Throws DataError unless both classes are present.
RocCurve roc_curve(std::span<const Label> labels, std::span<const double> scores);

/// Trapezoidal area under the curve.
double auc(const RocCurve& curve);

/// Row of a metric report.
struct ModelMetrics {
    ConfusionMatrix cm;
    Rates rates;
    std::optional<double> auc;  // empty when only one class is present
};

ModelMetrics evaluate_scores(std::span<const Label> labels, std::span<const double> scores,
                             double tau);

/// {"acc":..,"sen":..,"spe":..,"auc":..,"tp":..}; undefined values are null.
nlohmann::json to_json(const ModelMetrics& m);

/// Writes `fpr,tpr` rows.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve);

}  // namespace hde
