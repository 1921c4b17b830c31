#include "hde/micronet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hde/errors.hpp"

namespace hde {
namespace {

double sigmoid(double z)
{
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::string layer_name(std::size_t i, const LayerSpec& spec)
{
    return "layer " + std::to_string(i) + " (" + to_string(spec.kind) + ")";
}

std::size_t volume(const Shape3& s)
{
    return static_cast<std::size_t>(s[0]) * static_cast<std::size_t>(s[1]) *
           static_cast<std::size_t>(s[2]);
}

Tensor batch_tensor(int n, const Shape3& s)
{
    return Tensor({n, s[0], s[1], s[2]});
}

void conv_forward(const Layer& layer, const Tensor& in, Tensor& out, int n_batch)
{
    const auto [cin, h, w] = layer.in_shape;
    const auto [cout, oh, ow] = layer.out_shape;
    const int k = layer.spec.kernel;
    for (int n = 0; n < n_batch; ++n) {
        for (int co = 0; co < cout; ++co) {
            double* plane = out.data() + (static_cast<std::size_t>(n) * cout + co) * oh * ow;
            std::fill(plane, plane + static_cast<std::size_t>(oh) * ow, layer.bias[co]);
            for (int ci = 0; ci < cin; ++ci) {
                const double* src = in.data() + (static_cast<std::size_t>(n) * cin + ci) * h * w;
                for (int kh = 0; kh < k; ++kh) {
                    for (int kw = 0; kw < k; ++kw) {
                        const double wt =
                            layer.weight[((static_cast<std::size_t>(co) * cin + ci) * k + kh) * k + kw];
                        for (int r = 0; r < oh; ++r) {
                            const double* srow = src + static_cast<std::size_t>(r + kh) * w + kw;
                            double* orow = plane + static_cast<std::size_t>(r) * ow;
                            for (int c = 0; c < ow; ++c) orow[c] += wt * srow[c];
                        }
                    }
                }
            }
        }
    }
}

void conv_backward(const Layer& layer, const Tensor& in, const Tensor& dout, int n_batch,
                   ParamGrad* pg, Tensor* din)
{
    const auto [cin, h, w] = layer.in_shape;
    const auto [cout, oh, ow] = layer.out_shape;
    const int k = layer.spec.kernel;
    for (int n = 0; n < n_batch; ++n) {
        for (int co = 0; co < cout; ++co) {
            const double* gplane = dout.data() + (static_cast<std::size_t>(n) * cout + co) * oh * ow;
            if (pg) {
                double acc = 0.0;
                for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) acc += gplane[i];
                pg->bias[co] += acc;
            }
            for (int ci = 0; ci < cin; ++ci) {
                const std::size_t plane_off = (static_cast<std::size_t>(n) * cin + ci) * h * w;
                const double* src = in.data() + plane_off;
                for (int kh = 0; kh < k; ++kh) {
                    for (int kw = 0; kw < k; ++kw) {
                        const std::size_t widx =
                            ((static_cast<std::size_t>(co) * cin + ci) * k + kh) * k + kw;
                        if (pg) {
                            double acc = 0.0;
                            for (int r = 0; r < oh; ++r) {
                                const double* srow = src + static_cast<std::size_t>(r + kh) * w + kw;
                                const double* grow = gplane + static_cast<std::size_t>(r) * ow;
                                for (int c = 0; c < ow; ++c) acc += grow[c] * srow[c];
                            }
                            pg->weight[widx] += acc;
                        }
                        if (din) {
                            const double wt = layer.weight[widx];
                            double* dst = din->data() + plane_off;
                            for (int r = 0; r < oh; ++r) {
                                double* drow = dst + static_cast<std::size_t>(r + kh) * w + kw;
                                const double* grow = gplane + static_cast<std::size_t>(r) * ow;
                                for (int c = 0; c < ow; ++c) drow[c] += wt * grow[c];
                            }
                        }
                    }
                }
            }
        }
    }
}

void dense_forward(const Layer& layer, const Tensor& in, Tensor& out, int n_batch)
{
    const std::size_t nin = volume(layer.in_shape);
    const std::size_t nout = volume(layer.out_shape);
    for (int n = 0; n < n_batch; ++n) {
        const double* x = in.data() + static_cast<std::size_t>(n) * nin;
        double* y = out.data() + static_cast<std::size_t>(n) * nout;
        for (std::size_t u = 0; u < nout; ++u) {
            const double* wrow = layer.weight.data() + u * nin;
            double acc = layer.bias[u];
            for (std::size_t i = 0; i < nin; ++i) acc += wrow[i] * x[i];
            y[u] = acc;
        }
    }
}

void dense_backward(const Layer& layer, const Tensor& in, const Tensor& dout, int n_batch,
                    ParamGrad* pg, Tensor* din)
{
    const std::size_t nin = volume(layer.in_shape);
    const std::size_t nout = volume(layer.out_shape);
    for (int n = 0; n < n_batch; ++n) {
        const double* x = in.data() + static_cast<std::size_t>(n) * nin;
        const double* g = dout.data() + static_cast<std::size_t>(n) * nout;
        for (std::size_t u = 0; u < nout; ++u) {
            const double gu = g[u];
            if (gu == 0.0) continue;
            const double* wrow = layer.weight.data() + u * nin;
            if (pg) {
                double* gw = pg->weight.data() + u * nin;
                for (std::size_t i = 0; i < nin; ++i) gw[i] += gu * x[i];
                pg->bias[u] += gu;
            }
            if (din) {
                double* dx = din->data() + static_cast<std::size_t>(n) * nin;
                for (std::size_t i = 0; i < nin; ++i) dx[i] += gu * wrow[i];
            }
        }
    }
}

}  // namespace

std::string to_string(LayerKind kind)
{
    switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool2: return "maxpool2";
    case LayerKind::global_avg_pool: return "global_avg_pool";
    case LayerKind::dense: return "dense";
    case LayerKind::dropout: return "dropout";
    case LayerKind::sigmoid_head: return "sigmoid_head";
    }
    return "?";
}

LayerKind parse_layer_kind(const std::string& name)
{
    for (LayerKind k : {LayerKind::conv2d, LayerKind::relu, LayerKind::maxpool2,
                        LayerKind::global_avg_pool, LayerKind::dense, LayerKind::dropout, LayerKind::sigmoid_head}) {
        if (to_string(k) == name) return k;
    }
    throw DataError("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::conv(int out_channels, int kernel)
{
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.out_channels = out_channels;
    s.kernel = kernel;
    return s;
}

LayerSpec LayerSpec::relu()
{
    return LayerSpec{};
}

LayerSpec LayerSpec::maxpool()
{
    LayerSpec s;
    s.kind = LayerKind::maxpool2;
    return s;
}

LayerSpec LayerSpec::global_avg_pool()
{
    LayerSpec s;
    s.kind = LayerKind::global_avg_pool;
    return s;
}

LayerSpec LayerSpec::dense(int units)
{
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.units = units;
    return s;
}

LayerSpec LayerSpec::dropout(double rate)
{
    LayerSpec s;
    s.kind = LayerKind::dropout;
    s.rate = rate;
    return s;
}

LayerSpec LayerSpec::head()
{
    LayerSpec s;
    s.kind = LayerKind::sigmoid_head;
    s.units = 1;
    return s;
}

MicroNet::MicroNet(std::string architecture_id, Shape3 input_shape, std::vector<LayerSpec> specs,
                   std::size_t head_start)
    : architecture_id_(std::move(architecture_id)), input_shape_(input_shape), head_start_(head_start)
{
    if (specs.empty()) throw std::invalid_argument("network has no layers");
    if (input_shape[0] <= 0 || input_shape[1] <= 0 || input_shape[2] <= 0) {
        throw std::invalid_argument("input shape must be positive");
    }
    Shape3 shape = input_shape;
    std::size_t last_conv = specs.size();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& spec = specs[i];
        Layer layer;
        layer.spec = spec;
        layer.in_shape = shape;
        const std::string name = layer_name(i, spec);
        switch (spec.kind) {
        case LayerKind::conv2d: {
            if (spec.out_channels <= 0 || spec.kernel <= 0) throw std::invalid_argument(name + ": bad parameters");
            if (spec.kernel > shape[1] || spec.kernel > shape[2]) {
                throw std::invalid_argument(name + ": kernel larger than input " +
                                            std::to_string(shape[1]) + "x" + std::to_string(shape[2]));
            }
            layer.out_shape = {spec.out_channels, shape[1] - spec.kernel + 1, shape[2] - spec.kernel + 1};
            layer.weight = Tensor({spec.out_channels, shape[0], spec.kernel, spec.kernel});
            layer.bias = Tensor({spec.out_channels});
            last_conv = i;
            break;
        }
        case LayerKind::relu:
            layer.out_shape = shape;
            break;
        case LayerKind::dropout:
            if (!(spec.rate >= 0.0 && spec.rate < 1.0)) throw std::invalid_argument(name + ": rate must lie in [0,1)");
            layer.out_shape = shape;
            break;
        case LayerKind::maxpool2:
            if (shape[1] < 2 || shape[2] < 2) throw std::invalid_argument(name + ": input smaller than 2x2");
            layer.out_shape = {shape[0], shape[1] / 2, shape[2] / 2};
            break;
        case LayerKind::global_avg_pool:
            layer.out_shape = {shape[0], 1, 1};
            break;
        case LayerKind::dense:
        case LayerKind::sigmoid_head: {
            const int units = spec.kind == LayerKind::sigmoid_head ? 1 : spec.units;
            if (units <= 0) throw std::invalid_argument(name + ": units must be positive");
            if (spec.kind == LayerKind::sigmoid_head && i + 1 != specs.size()) {
                throw std::invalid_argument(name + ": sigmoid_head must be the last layer");
            }
            const auto nin = static_cast<int>(volume(shape));
            layer.out_shape = {units, 1, 1};
            layer.weight = Tensor({units, nin});
            layer.bias = Tensor({units});
            break;
        }
        }
        if (layer.has_parameters()) {
            layer.weight_moments = {Tensor(layer.weight.shape()), Tensor(layer.weight.shape())};
            layer.bias_moments = {Tensor(layer.bias.shape()), Tensor(layer.bias.shape())};
        }
        shape = layer.out_shape;
        layers_.push_back(std::move(layer));
    }
    if (layers_.back().spec.kind != LayerKind::sigmoid_head) {
        throw std::invalid_argument("network must end in a sigmoid_head");
    }
    if (last_conv == specs.size()) throw std::invalid_argument("network needs at least one conv2d layer");
    if (head_start_ == 0 || head_start_ >= specs.size() || last_conv >= head_start_) {
        throw std::invalid_argument("head must start after the last conv2d layer");
    }
    feature_layer_ = last_conv;
    if (last_conv + 1 < layers_.size() && layers_[last_conv + 1].spec.kind == LayerKind::relu) {
        feature_layer_ = last_conv + 1;
    }
}

void MicroNet::initialize(Rng& rng)
{
    for (Layer& layer : layers_) {
        if (!layer.has_parameters()) continue;
        const std::size_t fan_in = layer.weight.size() / static_cast<std::size_t>(layer.weight.dim(0));
        const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < layer.weight.size(); ++i) layer.weight[i] = std * standard_normal(rng);
        layer.bias.fill(0.0);
        layer.weight_moments.m.fill(0.0);
        layer.weight_moments.v.fill(0.0);
        layer.bias_moments.m.fill(0.0);
        layer.bias_moments.v.fill(0.0);
        layer.adam_step = 0;
    }
    touch();
}

void MicroNet::set_trainable(std::size_t layer, bool trainable)
{
    layers_.at(layer).spec.trainable = trainable;
}

void MicroNet::set_all_trainable(bool trainable)
{
    for (Layer& l : layers_) l.spec.trainable = trainable;
}

std::size_t MicroNet::parameter_count() const
{
    std::size_t n = 0;
    for (const Layer& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

const Tensor& ForwardCache::feature_maps() const
{
    if (!net) throw std::logic_error("empty forward cache");
    return activations.at(net->feature_layer() + 1);
}

Tensor make_batch(std::span<const LabeledSample> samples, std::span<const std::size_t> indices)
{
    if (indices.empty()) throw std::invalid_argument("make_batch: no samples");
    const Image* first = std::get_if<Image>(&samples[indices[0]].payload);
    if (!first) throw DataError("sample has no image payload");
    const int h = first->height;
    const int w = first->width;
    Tensor batch({static_cast<int>(indices.size()), 1, h, w});
    for (std::size_t n = 0; n < indices.size(); ++n) {
        const Image* img = std::get_if<Image>(&samples[indices[n]].payload);
        if (!img) throw DataError("sample has no image payload");
        if (img->height != h || img->width != w) throw DataError("images in a batch differ in size");
        std::copy(img->pixels.begin(), img->pixels.end(),
                  batch.data() + n * static_cast<std::size_t>(h) * w);
    }
    return batch;
}

ForwardCache forward(const MicroNet& net, const Tensor& batch, bool training, Rng* dropout_rng)
{
    const Shape3& in = net.input_shape();
    if (batch.rank() != 4 || batch.dim(1) != in[0] || batch.dim(2) != in[1] || batch.dim(3) != in[2]) {
        throw std::invalid_argument(layer_name(0, net.layer(0).spec) + ": expected input [N," +
                                    std::to_string(in[0]) + "," + std::to_string(in[1]) + "," +
                                    std::to_string(in[2]) + "], got " + batch.shape_string());
    }
    const int n_batch = batch.dim(0);
    ForwardCache cache;
    cache.net = &net;
    cache.net_version = net.version();
    cache.batch = n_batch;
    cache.activations.reserve(net.layer_count() + 1);
    cache.activations.push_back(batch);
    cache.dropout_scale.resize(net.layer_count());
    cache.pool_argmax.resize(net.layer_count());

    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const Layer& layer = net.layer(i);
        const Tensor& x = cache.activations.back();
        Tensor y = batch_tensor(n_batch, layer.out_shape);
        switch (layer.spec.kind) {
        case LayerKind::conv2d:
            conv_forward(layer, x, y, n_batch);
            break;
        case LayerKind::relu:
            for (std::size_t j = 0; j < x.size(); ++j) y[j] = x[j] > 0.0 ? x[j] : 0.0;
            break;
        case LayerKind::dropout:
            if (training && layer.spec.rate > 0.0) {
                if (!dropout_rng) throw std::invalid_argument(layer_name(i, layer.spec) + ": training mode needs an RNG");
                const double keep_scale = 1.0 / (1.0 - layer.spec.rate);
                auto& scale = cache.dropout_scale[i];
                scale.resize(x.size());
                for (std::size_t j = 0; j < x.size(); ++j) {
                    scale[j] = uniform01(*dropout_rng) < layer.spec.rate ? 0.0 : keep_scale;
                    y[j] = x[j] * scale[j];
                }
            } else {
                y = x;
            }
            break;
        case LayerKind::maxpool2: {
            const auto [c, h, w] = layer.in_shape;
            const auto [oc, oh, ow] = layer.out_shape;
            auto& argmax = cache.pool_argmax[i];
            argmax.resize(y.size());
            std::size_t out_idx = 0;
            for (int n = 0; n < n_batch; ++n) {
                for (int ch = 0; ch < c; ++ch) {
                    const std::size_t base = (static_cast<std::size_t>(n) * c + ch) * h * w;
                    for (int r = 0; r < oh; ++r) {
                        for (int col = 0; col < ow; ++col, ++out_idx) {
                            std::size_t best = base + static_cast<std::size_t>(2 * r) * w + 2 * col;
                            for (int dr = 0; dr < 2; ++dr) {
                                for (int dc = 0; dc < 2; ++dc) {
                                    const std::size_t idx =
                                        base + static_cast<std::size_t>(2 * r + dr) * w + 2 * col + dc;
                                    if (x[idx] > x[best]) best = idx;
                                }
                            }
                            argmax[out_idx] = static_cast<std::uint32_t>(best);
                            y[out_idx] = x[best];
                        }
                    }
                }
            }
            break;
        }
        case LayerKind::global_avg_pool: {
            const std::size_t plane = static_cast<std::size_t>(layer.in_shape[1]) * layer.in_shape[2];
            for (std::size_t j = 0; j < y.size(); ++j) {
                double sum = 0.0;
                for (std::size_t q = 0; q < plane; ++q) sum += x[j * plane + q];
                y[j] = sum / static_cast<double>(plane);
            }
            break;
        }
        case LayerKind::dense:
        case LayerKind::sigmoid_head:
            dense_forward(layer, x, y, n_batch);
            break;
        }
        cache.activations.push_back(std::move(y));
    }

    const Tensor& out = cache.activations.back();
    cache.logits.assign(out.values().begin(), out.values().end());
    cache.probabilities.resize(cache.logits.size());
    std::transform(cache.logits.begin(), cache.logits.end(), cache.probabilities.begin(), sigmoid);
    return cache;
}

GradientSet backward_from_logits(const MicroNet& net, const ForwardCache& cache,
                                 std::span<const double> dlogits, const BackwardOptions& options)
{
    if (cache.net != &net || cache.net_version != net.version()) {
        throw std::logic_error("stale forward cache: network changed since the forward pass");
    }
    if (dlogits.size() != static_cast<std::size_t>(cache.batch)) {
        throw std::invalid_argument("backward: upstream gradient size does not match batch");
    }
    const std::size_t count = net.layer_count();
    const std::size_t feature = net.feature_layer();

    // Lowest layer whose input gradient is needed.
    std::size_t stop = options.input_grad ? 0 : feature + 1;
    for (std::size_t j = 0; j < count; ++j) {
        const Layer& l = net.layer(j);
        if (l.has_parameters() && l.spec.trainable) stop = std::min(stop, j + 1);
    }

    GradientSet grads;
    grads.layers.resize(count);
    Tensor g({cache.batch, 1, 1, 1});
    std::copy(dlogits.begin(), dlogits.end(), g.data());

    for (std::size_t i = count; i-- > 0;) {
        if (i == feature) grads.feature_grad = g;
        const Layer& layer = net.layer(i);
        const Tensor& x = cache.activations[i];
        ParamGrad* pg = nullptr;
        if (layer.has_parameters() && layer.spec.trainable) {
            grads.layers[i].weight = Tensor(layer.weight.shape());
            grads.layers[i].bias = Tensor(layer.bias.shape());
            pg = &grads.layers[i];
        }
        const bool need_input = i >= stop;
        if (!pg && !need_input) break;

        Tensor din;
        if (need_input) din = Tensor(x.shape());
        switch (layer.spec.kind) {
        case LayerKind::conv2d:
            conv_backward(layer, x, g, cache.batch, pg, need_input ? &din : nullptr);
            break;
        case LayerKind::dense:
        case LayerKind::sigmoid_head:
            dense_backward(layer, x, g, cache.batch, pg, need_input ? &din : nullptr);
            break;
        case LayerKind::relu:
            for (std::size_t j = 0; j < x.size(); ++j) din[j] = x[j] > 0.0 ? g[j] : 0.0;
            break;
        case LayerKind::dropout: {
            const auto& scale = cache.dropout_scale[i];
            if (scale.empty()) {
                din = g;
            } else {
                for (std::size_t j = 0; j < g.size(); ++j) din[j] = g[j] * scale[j];
            }
            break;
        }
        case LayerKind::maxpool2: {
            const auto& argmax = cache.pool_argmax[i];
            for (std::size_t j = 0; j < g.size(); ++j) din[argmax[j]] += g[j];
            break;
        }
        case LayerKind::global_avg_pool: {
            const std::size_t plane = static_cast<std::size_t>(layer.in_shape[1]) * layer.in_shape[2];
            for (std::size_t j = 0; j < g.size(); ++j) {
                const double share = g[j] / static_cast<double>(plane);
                for (std::size_t q = 0; q < plane; ++q) din[j * plane + q] = share;
            }
            break;
        }
        }
        if (!need_input) break;
        g = std::move(din);
        if (i == 0) grads.input_grad = g;
    }
    if (!options.input_grad) grads.input_grad = Tensor();
    return grads;
}

double batch_bce(const ForwardCache& cache, std::span<const Label> labels)
{
    if (labels.size() != cache.logits.size()) throw std::invalid_argument("batch_bce: label count mismatch");
    double total = 0.0;
    for (std::size_t n = 0; n < labels.size(); ++n) {
        const double z = cache.logits[n];
        const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        total += labels[n] == Label::positive ? softplus - z : softplus;
    }
    return total / static_cast<double>(labels.size());
}

GradientSet backward(const MicroNet& net, const ForwardCache& cache, std::span<const Label> labels,
                     const BackwardOptions& options)
{
    if (labels.size() != static_cast<std::size_t>(cache.batch)) {
        throw std::invalid_argument("backward: label count does not match batch");
    }
    std::vector<double> dlogits(labels.size());
    const double inv_n = 1.0 / static_cast<double>(labels.size());
    for (std::size_t n = 0; n < labels.size(); ++n)
        dlogits[n] = (cache.probabilities[n] - to_target(labels[n])) * inv_n;
    return backward_from_logits(net, cache, dlogits, options);
}

void adam_step(MicroNet& net, const GradientSet& grads, double lr, const AdamHyper& hyper)
{
    if (grads.layers.size() != net.layer_count()) {
        throw std::invalid_argument("adam_step: gradient set does not match network");
    }
    // Validate everything before touching any parameter.
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const Layer& layer = net.layer(i);
        if (!layer.has_parameters() || !layer.spec.trainable) continue;
        const ParamGrad& pg = grads.layers[i];
        if (!pg.present() || pg.weight.shape() != layer.weight.shape() ||
            pg.bias.shape() != layer.bias.shape()) {
            throw std::invalid_argument("adam_step: missing or misshapen gradient for " +
                                        layer_name(i, layer.spec));
        }
        for (std::size_t j = 0; j < pg.weight.size(); ++j) {
            if (!std::isfinite(pg.weight[j])) {
                throw NumericError("non-finite gradient at " + layer_name(i, layer.spec) +
                                   ".weight[" + std::to_string(j) + "]");
            }
        }
        for (std::size_t j = 0; j < pg.bias.size(); ++j) {
            if (!std::isfinite(pg.bias[j])) {
                throw NumericError("non-finite gradient at " + layer_name(i, layer.spec) +
                                   ".bias[" + std::to_string(j) + "]");
            }
        }
    }

    auto update = [&](Tensor& param, AdamMoments& mom, const Tensor& grad, double c1, double c2) {
        for (std::size_t j = 0; j < param.size(); ++j) {
            const double gj = grad[j];
            mom.m[j] = hyper.beta1 * mom.m[j] + (1.0 - hyper.beta1) * gj;
            mom.v[j] = hyper.beta2 * mom.v[j] + (1.0 - hyper.beta2) * gj * gj;
            const double m_hat = mom.m[j] / c1;
            const double v_hat = mom.v[j] / c2;
            param[j] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
        }
    };

    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        Layer& layer = net.layer(i);
        if (!layer.has_parameters() || !layer.spec.trainable) continue;
        ++layer.adam_step;
        const double t = static_cast<double>(layer.adam_step);
        const double c1 = 1.0 - std::pow(hyper.beta1, t);
        const double c2 = 1.0 - std::pow(hyper.beta2, t);
        update(layer.weight, layer.weight_moments, grads.layers[i].weight, c1, c2);
        update(layer.bias, layer.bias_moments, grads.layers[i].bias, c1, c2);
    }
    net.touch();
}

std::vector<double> predict_probabilities(const MicroNet& net, std::span<const LabeledSample> samples,
                                          std::span<const std::size_t> indices, std::size_t chunk)
{
    std::vector<double> out;
    out.reserve(indices.size());
    for (std::size_t start = 0; start < indices.size(); start += chunk) {
        const auto part = indices.subspan(start, std::min(chunk, indices.size() - start));
        const ForwardCache cache = forward(net, make_batch(samples, part), false);
        out.insert(out.end(), cache.probabilities.begin(), cache.probabilities.end());
    }
    return out;
}

}  // namespace hde
