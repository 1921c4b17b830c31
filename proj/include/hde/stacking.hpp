#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hde/config.hpp"
#include "hde/split.hpp"
#include "hde/types.hpp"
#include "hde/weighted_avg.hpp"

namespace hde {

/// A trainable binary classifier that outputs P(positive).
class BaseLearner {
public:
    virtual ~BaseLearner() = default;

    /// Trains on `samples[train_indices]` and records the index set.
    void fit(std::span<const LabeledSample> samples, std::span<const std::size_t> train_indices);
    virtual std::vector<double> predict(std::span<const LabeledSample> samples,
                                        std::span<const std::size_t> indices) const = 0;

    /// Exactly the indices passed to the last fit(), in that order.
    const std::vector<std::size_t>& trained_on() const { return trained_on_; }

protected:
    virtual void do_fit(std::span<const LabeledSample> samples,
                        std::span<const std::size_t> train_indices) = 0;

private:
    std::vector<std::size_t> trained_on_;
};

/// Builds a fresh learner for base architecture `model` in fold `fold`.
/// Must be deterministic in its arguments.
using BaseFactory = std::function<std::unique_ptr<BaseLearner>(int model, int fold)>;

/// Out-of-fold base predictions for the training samples.
struct OofTable {
    std::vector<std::size_t> sample_index;  // row -> sample index
    std::vector<int> fold;                  // row -> fold that held the row out
    PredictionMatrix matrix;                // rows x K
    std::vector<Label> labels;
    /// training_sets[f][k]: indices the model for (fold f, architecture k) trained on.
    std::vector<std::vector<std::vector<std::size_t>>> training_sets;

    const std::vector<std::size_t>& provenance(std::size_t row, std::size_t model) const
    {
        return training_sets[static_cast<std::size_t>(fold[row])][model];
    }
};

/// For each fold and architecture, trains on everything outside the fold and
/// predicts the fold. Jobs are independent and written at fixed rows, so the
/// table does not depend on `threads`. Failures are rethrown with the fold
/// and model attached.
OofTable oof_predictions(std::span<const LabeledSample> samples, const FoldAssignment& folds,
                         int model_count, const BaseFactory& factory, int threads = 1);

/// Number of (row, model) entries whose producing model trained on that row.
std::size_t count_leaks(const OofTable& table);

/// Logistic regression on the K base probabilities.
struct MetaLearner {
    std::vector<double> w;
    double b = 0.0;
};

/// sigmoid(w . p + b)
double meta_predict(const MetaLearner& m, std::span<const double> p);

/// Mean BCE plus (l2/2)|w|^2.
double meta_loss(const MetaLearner& m, const PredictionMatrix& x, std::span<const Label> labels,
                 double l2);
/// Gradient of meta_loss; the last entry is d/db.
std::vector<double> meta_gradient(const MetaLearner& m, const PredictionMatrix& x,
                                  std::span<const Label> labels, double l2);

struct MetaOptions {
    int epochs = 2000;
    double learning_rate = 1.0;
    double l2 = 0.0;
};

struct MetaFit {
    MetaLearner learner;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    double effective_learning_rate = 0.0;
};

/// Full-batch gradient descent from w = 0, b = 0. The step is capped at 1/L,
/// with L the Lipschitz bound max_i(|p_i|^2 + 1)/4 + l2 of the gradient, so
/// the loss never increases. Throws NumericError with the epoch index on a
/// non-finite loss.
MetaFit train_meta(const PredictionMatrix& x, std::span<const Label> labels,
                   const MetaOptions& options = {});

/// Final probability under a combine rule.
double hybrid_predict(const WeightVector& alpha, const MetaLearner& m, std::span<const double> p,
                      CombineRule rule);
double combine(double weighted, double stacked, CombineRule rule);

nlohmann::json to_json(const MetaLearner& m);
MetaLearner meta_from_json(const nlohmann::json& j);

/// `id,fold,p1..pK,label`; ids come from `row_ids`.
void write_oof_csv(const std::filesystem::path& path, const OofTable& table,
                   std::span<const std::string> row_ids);

}  // namespace hde
