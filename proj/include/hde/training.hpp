#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hde/config.hpp"
#include "hde/micronet.hpp"
#include "hde/rng.hpp"
#include "hde/stacking.hpp"

namespace hde {

struct TrainOptions {
    int freeze_epochs = 60;
    int finetune_epochs = 10;
    double head_learning_rate = 3e-2;
    double finetune_learning_rate = 2e-5;
    int batch_size = 24;
    int unfreeze_conv_layers = 1;

    static TrainOptions from_config(const RunConfig& config);
};

struct EpochRecord {
    int phase = 1;  // 1: head only, 2: fine-tuning
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_loss;
    std::optional<double> val_accuracy;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

/// Freezes every backbone layer and unfreezes the head.
void freeze_backbone(MicroNet& net);
/// Additionally unfreezes the last `count` conv2d layers of the backbone.
/// Returns their layer indices.
std::vector<std::size_t> unfreeze_top_conv(MicroNet& net, int count);

/// Two-phase transfer-style training.
///
/// Phase 1 trains only the head for `freeze_epochs` at the head learning rate;
/// phase 2 unfreezes the configured trailing conv layers and trains the head
/// plus those layers for `finetune_epochs` at the fine-tuning rate. Each
/// epoch shuffles the training indices with `rng` and runs mini-batch Adam on
/// mean BCE. Validation loss/accuracy are recorded per epoch when `val` is
/// nonempty. Throws DataError when `train` is empty.
TrainHistory train_two_phase(MicroNet& net, std::span<const LabeledSample> samples,
                             std::span<const std::size_t> train, std::span<const std::size_t> val,
                             const TrainOptions& options, Rng& rng);

/// Base learner backed by a freshly initialized micro-CNN.
class CnnLearner : public BaseLearner {
public:
    CnnLearner(int variant, int input_side, double dropout_rate, TrainOptions options,
               std::uint64_t seed, std::vector<std::size_t> monitor);

    std::vector<double> predict(std::span<const LabeledSample> samples,
                                std::span<const std::size_t> indices) const override;

    const MicroNet& net() const { return net_; }
    const TrainHistory& history() const { return history_; }

protected:
    void do_fit(std::span<const LabeledSample> samples,
                std::span<const std::size_t> train_indices) override;

private:
    MicroNet net_;
    TrainOptions options_;
    std::uint64_t seed_;
    std::vector<std::size_t> monitor_;
    TrainHistory history_;
};

}  // namespace hde
