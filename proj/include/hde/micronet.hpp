#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hde/rng.hpp"
#include "hde/tensor.hpp"
#include "hde/types.hpp"

namespace hde {

enum class LayerKind { conv2d, relu, maxpool2, global_avg_pool, dense, dropout, sigmoid_head };

std::string to_string(LayerKind kind);
LayerKind parse_layer_kind(const std::string& name);

/// Declarative description of one layer. Convolutions are stride 1 with valid
/// padding; max pooling is 2x2 with stride 2 (odd trailing rows/cols drop).
/// `global_avg_pool` averages each channel to a single value.
/// `dense` and `sigmoid_head` flatten their input; `sigmoid_head` is a single
/// logit unit whose sigmoid is the network output.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    int out_channels = 0;  // conv2d
    int kernel = 0;        // conv2d
    int units = 0;         // dense
    double rate = 0.0;     // dropout
    bool trainable = true;

    static LayerSpec conv(int out_channels, int kernel = 3);
    static LayerSpec relu();
    static LayerSpec maxpool();
    static LayerSpec global_avg_pool();
    static LayerSpec dense(int units);
    static LayerSpec dropout(double rate);
    static LayerSpec head();
};

using Shape3 = std::array<int, 3>;  // channels, height, width

/// First and second Adam moments of one parameter tensor.
struct AdamMoments {
    Tensor m;
    Tensor v;
};

struct Layer {
    LayerSpec spec;
    Shape3 in_shape{};
    Shape3 out_shape{};
    Tensor weight;  // conv: [out, in, k, k]; dense/head: [out, in]
    Tensor bias;    // [out]
    AdamMoments weight_moments;
    AdamMoments bias_moments;
    std::int64_t adam_step = 0;

    bool has_parameters() const { return !weight.empty(); }
};

/// Small CNN with per-layer trainability. Layers before `head_start()` form
/// the backbone, the rest the classification head.
class MicroNet {
public:
    /// Infers shapes and allocates zeroed parameters. Throws
    /// std::invalid_argument naming the layer when shapes do not fit, when the
    /// last layer is not the only sigmoid_head, or when there is no conv2d.
    MicroNet(std::string architecture_id, Shape3 input_shape, std::vector<LayerSpec> specs,
             std::size_t head_start);

    /// He-normal weights, zero biases, reset Adam state.
    void initialize(Rng& rng);

    const std::string& architecture_id() const { return architecture_id_; }
    const Shape3& input_shape() const { return input_shape_; }
    std::size_t head_start() const { return head_start_; }
    std::size_t layer_count() const { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return layers_.at(i); }
    Layer& layer(std::size_t i) { return layers_.at(i); }
    const std::vector<Layer>& layers() const { return layers_; }

    /// Index of the layer whose output is the Grad-CAM activation stack: the
    /// last conv2d, or the relu directly after it.
    std::size_t feature_layer() const { return feature_layer_; }

    void set_trainable(std::size_t layer, bool trainable);
    void set_all_trainable(bool trainable);

    /// Parameter count across all layers.
    std::size_t parameter_count() const;
    /// Bumped on every parameter update; caches from older versions are stale.
    std::uint64_t version() const { return version_; }
    void touch() { ++version_; }

private:
    std::string architecture_id_;
    Shape3 input_shape_{};
    std::vector<Layer> layers_;
    std::size_t head_start_ = 0;
    std::size_t feature_layer_ = 0;
    std::uint64_t version_ = 0;
};

/// Activations of one forward pass.
struct ForwardCache {
    std::uint64_t net_version = 0;
    const MicroNet* net = nullptr;
    int batch = 0;
    /// activations[0] is the input; activations[i + 1] is layer i's output,
    /// shaped [batch, C, H, W].
    std::vector<Tensor> activations;
    std::vector<std::vector<double>> dropout_scale;      // per layer, empty if inactive
    std::vector<std::vector<std::uint32_t>> pool_argmax;  // per layer
    std::vector<double> logits;
    std::vector<double> probabilities;

    /// The Grad-CAM activation stack A, [batch, C, H, W].
    const Tensor& feature_maps() const;
};

/// Parameter gradients for one layer; empty when the layer is frozen or has
/// no parameters.
struct ParamGrad {
    Tensor weight;
    Tensor bias;
    bool present() const { return !weight.empty(); }
};

struct GradientSet {
    std::vector<ParamGrad> layers;
    /// d(objective)/dA for the Grad-CAM activation stack.
    Tensor feature_grad;
    /// d(objective)/d(input); filled only when requested.
    Tensor input_grad;
};

/// [N, C, H, W] batch from image samples.
Tensor make_batch(std::span<const LabeledSample> samples, std::span<const std::size_t> indices);

/// Runs the network. Dropout is active only when `training` is true, using
/// inverted scaling by 1/(1-rate); `dropout_rng` is then required.
/// Throws std::invalid_argument naming the first layer whose input shape
/// does not match.
ForwardCache forward(const MicroNet& net, const Tensor& batch, bool training,
                     Rng* dropout_rng = nullptr);

struct BackwardOptions {
    bool input_grad = false;
};

/// Backpropagates an arbitrary upstream gradient on the logits.
/// Throws std::logic_error when the cache is stale.
GradientSet backward_from_logits(const MicroNet& net, const ForwardCache& cache,
                                 std::span<const double> dlogits,
                                 const BackwardOptions& options = {});

/// Backpropagates the mean binary cross-entropy of the batch.
GradientSet backward(const MicroNet& net, const ForwardCache& cache, std::span<const Label> labels,
                     const BackwardOptions& options = {});

/// Mean BCE of cached probabilities against labels.
double batch_bce(const ForwardCache& cache, std::span<const Label> labels);

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Applies one Adam update to every trainable layer; frozen layers are left
/// bit-identical. Throws NumericError with the parameter path on a non-finite
/// gradient and std::invalid_argument when a trainable layer lacks gradients.
void adam_step(MicroNet& net, const GradientSet& grads, double lr, const AdamHyper& hyper = {});

/// Inference-mode probabilities, evaluated in chunks.
std::vector<double> predict_probabilities(const MicroNet& net,
                                          std::span<const LabeledSample> samples,
                                          std::span<const std::size_t> indices,
                                          std::size_t chunk = 64);

}  // namespace hde
