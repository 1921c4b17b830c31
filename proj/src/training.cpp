#include "hde/training.hpp"

#include <algorithm>
#include <numeric>

#include "hde/architectures.hpp"
#include "hde/errors.hpp"
#include "hde/metrics.hpp"

namespace hde {
namespace {

std::vector<Label> labels_of(std::span<const LabeledSample> samples, std::span<const std::size_t> idx)
{
    std::vector<Label> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(samples[i].label);
    return out;
}

double run_epoch(MicroNet& net, std::span<const LabeledSample> samples, std::vector<std::size_t>& order,
                 int batch_size, double lr, Rng& rng)
{
    shuffle(order, rng);
    double loss_sum = 0.0;
    const auto bs = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::span<const std::size_t> part(order.data() + start, std::min(bs, order.size() - start));
        const auto labels = labels_of(samples, part);
        const ForwardCache cache = forward(net, make_batch(samples, part), true, &rng);
        loss_sum += batch_bce(cache, labels) * static_cast<double>(part.size());
        const GradientSet grads = backward(net, cache, labels);
        adam_step(net, grads, lr);
    }
    return loss_sum / static_cast<double>(order.size());
}

void record_validation(const MicroNet& net, std::span<const LabeledSample> samples,
                       std::span<const std::size_t> val, EpochRecord& rec)
{
    if (val.empty()) return;
    const auto labels = labels_of(samples, val);
    double loss = 0.0;
    std::size_t correct = 0;
    constexpr std::size_t chunk = 64;
    for (std::size_t start = 0; start < val.size(); start += chunk) {
        const auto part = val.subspan(start, std::min(chunk, val.size() - start));
        const ForwardCache cache = forward(net, make_batch(samples, part), false);
        const auto part_labels = std::span<const Label>(labels).subspan(start, part.size());
        loss += batch_bce(cache, part_labels) * static_cast<double>(part.size());
        for (std::size_t j = 0; j < part.size(); ++j)
            if (threshold(cache.probabilities[j], 0.5) == part_labels[j]) ++correct;
    }
    rec.val_loss = loss / static_cast<double>(val.size());
    rec.val_accuracy = static_cast<double>(correct) / static_cast<double>(val.size());
}

}  // namespace

TrainOptions TrainOptions::from_config(const RunConfig& config)
{
    TrainOptions o;
    o.freeze_epochs = config.freeze_epochs;
    o.finetune_epochs = config.finetune_epochs;
    o.head_learning_rate = config.head_learning_rate;
    o.finetune_learning_rate = config.learning_rate;
    o.batch_size = config.batch_size;
    o.unfreeze_conv_layers = config.unfreeze_conv_layers;
    return o;
}

void freeze_backbone(MicroNet& net)
{
    for (std::size_t i = 0; i < net.layer_count(); ++i) net.set_trainable(i, i >= net.head_start());
}

std::vector<std::size_t> unfreeze_top_conv(MicroNet& net, int count)
{
    std::vector<std::size_t> unfrozen;
    for (std::size_t i = net.head_start(); i-- > 0 && static_cast<int>(unfrozen.size()) < count;) {
        if (net.layer(i).spec.kind == LayerKind::conv2d) {
            net.set_trainable(i, true);
            unfrozen.push_back(i);
        }
    }
    return unfrozen;
}

TrainHistory train_two_phase(MicroNet& net, std::span<const LabeledSample> samples,
                             std::span<const std::size_t> train, std::span<const std::size_t> val,
                             const TrainOptions& options, Rng& rng)
{
    if (train.empty()) throw DataError("training set is empty");
    if (options.batch_size <= 0) throw ConfigError("batch_size must be positive");
    TrainHistory history;
    std::vector<std::size_t> order(train.begin(), train.end());

    freeze_backbone(net);
    for (int e = 0; e < options.freeze_epochs; ++e) {
        EpochRecord rec;
        rec.phase = 1;
        rec.epoch = e;
        rec.train_loss = run_epoch(net, samples, order, options.batch_size, options.head_learning_rate, rng);
        record_validation(net, samples, val, rec);
        history.epochs.push_back(rec);
    }

    unfreeze_top_conv(net, options.unfreeze_conv_layers);
    for (int e = 0; e < options.finetune_epochs; ++e) {
        EpochRecord rec;
        rec.phase = 2;
        rec.epoch = e;
        rec.train_loss =
            run_epoch(net, samples, order, options.batch_size, options.finetune_learning_rate, rng);
        record_validation(net, samples, val, rec);
        history.epochs.push_back(rec);
    }
    return history;
}

CnnLearner::CnnLearner(int variant, int input_side, double dropout_rate, TrainOptions options,
                       std::uint64_t seed, std::vector<std::size_t> monitor)
    : net_(make_architecture(variant, input_side, dropout_rate)),
      options_(options),
      seed_(seed),
      monitor_(std::move(monitor))
{
    Rng init = make_rng(seed_, "init");
    net_.initialize(init);
}

void CnnLearner::do_fit(std::span<const LabeledSample> samples, std::span<const std::size_t> train_indices)
{
    Rng rng = make_rng(seed_, "train");
    history_ = train_two_phase(net_, samples, train_indices, monitor_, options_, rng);
}

std::vector<double> CnnLearner::predict(std::span<const LabeledSample> samples,
                                        std::span<const std::size_t> indices) const
{
    return predict_probabilities(net_, samples, indices);
}

}  // namespace hde
