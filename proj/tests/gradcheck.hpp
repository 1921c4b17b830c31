#pragma once

// Central finite-difference checks for MicroNet backpropagation.

#include <algorithm>
#include <cmath>
#include <vector>

#include "hde/micronet.hpp"
#include "hde/rng.hpp"
#include "oracles.hpp"

namespace gradcheck {

struct Result {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

/// Distance of any ReLU input or 2x2 pool window runner-up from a kink.
inline double kink_margin(const hde::MicroNet& net, const hde::ForwardCache& cache)
{
    double margin = INFINITY;
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const auto& layer = net.layer(i);
        const hde::Tensor& x = cache.activations[i];
        if (layer.spec.kind == hde::LayerKind::relu) {
            for (double v : x.values()) margin = std::min(margin, std::abs(v));
        } else if (layer.spec.kind == hde::LayerKind::maxpool2) {
            const auto [c, h, w] = layer.in_shape;
            for (int n = 0; n < cache.batch; ++n)
                for (int ch = 0; ch < c; ++ch)
                    for (int r = 0; r + 1 < h; r += 2)
                        for (int col = 0; col + 1 < w; col += 2) {
                            std::vector<double> win;
                            for (int dr = 0; dr < 2; ++dr)
                                for (int dc = 0; dc < 2; ++dc)
                                    win.push_back(x[((static_cast<std::size_t>(n) * c + ch) * h + r + dr) * w + col + dc]);
                            std::sort(win.begin(), win.end());
                            margin = std::min(margin, win[3] - win[2]);
                        }
        }
    }
    return margin;
}

/// Objective sum_n c_n * logit_n with the dropout mask fixed by `mask_seed`.
inline double objective(const hde::MicroNet& net, const hde::Tensor& input, const std::vector<double>& c,
                        bool training, std::uint64_t mask_seed)
{
    hde::Rng rng(mask_seed);
    const auto cache = hde::forward(net, input, training, &rng);
    double s = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) s += c[n] * cache.logits[n];
    return s;
}

/// Draws a random point (parameters, input, upstream weights) away from
/// ReLU/pool kinks, then compares every parameter and input derivative of
/// the objective with a central difference of step h.
inline Result check_point(hde::MicroNet& net, hde::Rng& rng, int batch, bool training, double h = 1e-5,
                          double floor = 1e-6)
{
    const auto [ci, hi, wi] = net.input_shape();
    hde::Tensor input({batch, ci, hi, wi});
    std::vector<double> c(static_cast<std::size_t>(batch));
    std::uint64_t mask_seed = 0;
    for (int attempt = 0;; ++attempt) {
        net.initialize(rng);
        for (std::size_t i = 0; i < net.layer_count(); ++i) {
            auto& l = net.layer(i);
            for (double& b : l.bias.values()) b = 0.2 * hde::standard_normal(rng);
        }
        net.touch();
        for (double& v : input.values()) v = hde::uniform01(rng);
        for (double& v : c) v = 2.0 * hde::uniform01(rng) - 1.0;
        mask_seed = rng();
        hde::Rng mask(mask_seed);
        const auto cache = hde::forward(net, input, training, &mask);
        if (kink_margin(net, cache) > 1e-3 || attempt > 200) break;
    }

    net.set_all_trainable(true);
    hde::Rng mask(mask_seed);
    const auto cache = hde::forward(net, input, training, &mask);
    hde::BackwardOptions opt;
    opt.input_grad = true;
    const auto grads = hde::backward_from_logits(net, cache, c, opt);

    Result res;
    auto compare = [&](double analytic, double& slot) {
        const double x0 = slot;
        slot = x0 + h;
        const double up = objective(net, input, c, training, mask_seed);
        slot = x0 - h;
        const double down = objective(net, input, c, training, mask_seed);
        slot = x0;
        const double fd = (up - down) / (2.0 * h);
        res.max_rel_error = std::max(res.max_rel_error, oracle::relative_error(analytic, fd, floor));
        ++res.checked;
    };
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        auto& l = net.layer(i);
        if (!l.has_parameters()) continue;
        for (std::size_t j = 0; j < l.weight.size(); ++j) compare(grads.layers[i].weight[j], l.weight[j]);
        for (std::size_t j = 0; j < l.bias.size(); ++j) compare(grads.layers[i].bias[j], l.bias[j]);
    }
    for (std::size_t j = 0; j < input.size(); ++j) compare(grads.input_grad[j], input[j]);
    return res;
}

}  // namespace gradcheck
