#include "hde/weighted_avg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "hde/errors.hpp"

namespace hde {

WeightVector::WeightVector(std::vector<double> alpha) : alpha_(std::move(alpha))
{
    if (alpha_.empty()) throw std::invalid_argument("weight vector must be nonempty");
    double sum = 0.0;
    for (double a : alpha_) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw std::invalid_argument("weights must be finite and nonnegative");
        }
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("weights must sum to 1");
    }
}

WeightVector WeightVector::uniform(std::size_t k)
{
    if (k == 0) throw std::invalid_argument("weight vector must be nonempty");
    return WeightVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

double weighted_predict(const WeightVector& alpha, std::span<const double> p)
{
    if (alpha.size() != p.size()) {
        throw std::invalid_argument("weighted_predict: " + std::to_string(alpha.size()) +
                                    " weights vs " + std::to_string(p.size()) + " predictions");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += alpha[k] * p[k];
    return std::clamp(s, 0.0, 1.0);
}

double bce_loss(double p_hat, Label y)
{
    const double p = std::clamp(p_hat, kLogClamp, 1.0 - kLogClamp);
    return y == Label::positive ? -std::log(p) : -std::log1p(-p);
}

WeightVector project_simplex(std::span<const double> v)
{
    const std::size_t k = v.size();
    if (k == 0) throw std::invalid_argument("project_simplex: empty vector");
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    // Largest rho with sorted[rho] - (cumsum_rho - 1)/(rho+1) > 0.
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        cumsum += sorted[j];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - t > 0.0) theta = t;
    }
    std::vector<double> x(k);
    for (std::size_t j = 0; j < k; ++j) x[j] = std::max(v[j] - theta, 0.0);

    // Absorb rounding so the sum is 1 to machine precision.
    const double sum = std::accumulate(x.begin(), x.end(), 0.0);
    if (sum > 0.0) {
        for (double& xi : x) xi /= sum;
    } else {
        std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(k));
    }
    const double residual = 1.0 - std::accumulate(x.begin(), x.end(), 0.0);
    auto largest = std::max_element(x.begin(), x.end());
    *largest = std::max(*largest + residual, 0.0);
    return WeightVector(std::move(x));
}

double mean_weighted_bce(const WeightVector& alpha, const PredictionMatrix& preds,
                         std::span<const Label> labels)
{
    if (preds.rows() != labels.size()) throw std::invalid_argument("row/label count mismatch");
    if (preds.rows() == 0) throw std::invalid_argument("no validation rows");
    double total = 0.0;
    for (std::size_t i = 0; i < preds.rows(); ++i)
        total += bce_loss(weighted_predict(alpha, preds.row(i)), labels[i]);
    return total / static_cast<double>(preds.rows());
}

std::vector<double> mean_weighted_bce_gradient(std::span<const double> alpha,
                                               const PredictionMatrix& preds,
                                               std::span<const Label> labels)
{
    if (preds.rows() != labels.size()) throw std::invalid_argument("row/label count mismatch");
    if (alpha.size() != preds.cols()) throw std::invalid_argument("weight/column count mismatch");
    std::vector<double> grad(alpha.size(), 0.0);
    for (std::size_t i = 0; i < preds.rows(); ++i) {
        const auto p = preds.row(i);
        double s = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) s += alpha[k] * p[k];
        if (s <= kLogClamp || s >= 1.0 - kLogClamp) continue;
        const double dl_ds = labels[i] == Label::positive ? -1.0 / s : 1.0 / (1.0 - s);
        for (std::size_t k = 0; k < p.size(); ++k) grad[k] += dl_ds * p[k];
    }
    for (double& g : grad) g /= static_cast<double>(preds.rows());
    return grad;
}

WeightFit optimize_weights(const PredictionMatrix& preds, std::span<const Label> labels,
                           const WeightOptions& options)
{
    if (preds.rows() == 0) throw std::invalid_argument("optimize_weights: no validation rows");
    if (preds.rows() != labels.size()) throw std::invalid_argument("optimize_weights: row/label count mismatch");
    if (preds.cols() == 0) throw std::invalid_argument("optimize_weights: no base models");
    if (options.step_size <= 0.0) throw std::invalid_argument("optimize_weights: step_size must be positive");

    WeightFit fit;
    const auto positives = std::count(labels.begin(), labels.end(), Label::positive);
    if (positives == 0 || static_cast<std::size_t>(positives) == labels.size()) {
        fit.warnings.push_back("validation rows contain a single class");
    }

    auto objective = [&](const WeightVector& a) {
        const double f = mean_weighted_bce(a, preds, labels);
        if (!std::isfinite(f)) throw NumericError("non-finite ensemble loss");
        return f;
    };

    WeightVector alpha = WeightVector::uniform(preds.cols());
    double f = objective(alpha);
    fit.initial_bce = f;
    if (options.on_iterate) options.on_iterate(alpha);

    int step = 0;
    for (; step < options.steps; ++step) {
        const auto grad = mean_weighted_bce_gradient(alpha.values(), preds, labels);
        for (std::size_t k = 0; k < grad.size(); ++k) {
            if (!std::isfinite(grad[k])) {
                throw NumericError("non-finite gradient for weight " + std::to_string(k) +
                                   " at step " + std::to_string(step));
            }
        }
        double eta = options.step_size;
        bool accepted = false;
        std::vector<double> trial(alpha.size());
        for (int h = 0; h <= options.max_halvings; ++h, eta *= 0.5) {
            for (std::size_t k = 0; k < trial.size(); ++k) trial[k] = alpha[k] - eta * grad[k];
            WeightVector candidate = project_simplex(trial);
            const double fc = objective(candidate);
            if (fc <= f) {
                double change = 0.0;
                for (std::size_t k = 0; k < alpha.size(); ++k)
                    change = std::max(change, std::abs(candidate[k] - alpha[k]));
                alpha = std::move(candidate);
                f = fc;
                accepted = true;
                if (options.on_iterate) options.on_iterate(alpha);
                if (change < options.tolerance) {
                    ++step;
                    fit.steps_used = step;
                    fit.alpha = alpha;
                    fit.val_bce = f;
                    return fit;
                }
                break;
            }
        }
        if (!accepted) break;
    }
    fit.steps_used = step;
    fit.alpha = alpha;
    fit.val_bce = f;
    return fit;
}

nlohmann::json to_json(const WeightFit& fit)
{
    return nlohmann::json{{"alpha", fit.alpha.values()}, {"val_bce", fit.val_bce},
                          {"steps_used", fit.steps_used}};
}

}  // namespace hde
