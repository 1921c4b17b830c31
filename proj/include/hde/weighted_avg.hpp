#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hde/types.hpp"

namespace hde {

/// Convex-combination weights on the probability simplex.
class WeightVector {
public:
    /// Throws std::invalid_argument unless every entry is >= 0 and the sum is
    /// 1 within 1e-12.
    explicit WeightVector(std::vector<double> alpha);

    static WeightVector uniform(std::size_t k);

    std::size_t size() const { return alpha_.size(); }
    double operator[](std::size_t k) const { return alpha_[k]; }
    const std::vector<double>& values() const { return alpha_; }

private:
    std::vector<double> alpha_;
};

inline constexpr double kLogClamp = 1e-12;

/// alpha . p
double weighted_predict(const WeightVector& alpha, std::span<const double> p);

/// Binary cross-entropy with p_hat clamped to [1e-12, 1 - 1e-12].
double bce_loss(double p_hat, Label y);

/// Euclidean projection onto the probability simplex (sort-and-threshold).
WeightVector project_simplex(std::span<const double> v);

/// Mean BCE of alpha . p_i over the rows.
double mean_weighted_bce(const WeightVector& alpha, const PredictionMatrix& preds,
                         std::span<const Label> labels);

/// Gradient of mean_weighted_bce with respect to alpha. Rows whose ensemble
/// probability sits on a clamp boundary contribute zero (the clamp is flat).
std::vector<double> mean_weighted_bce_gradient(std::span<const double> alpha,
                                               const PredictionMatrix& preds,
                                               std::span<const Label> labels);

struct WeightOptions {
    int steps = 500;
    double step_size = 0.5;
    int max_halvings = 30;
    double tolerance = 1e-10;  // on the inf-norm of the accepted step
    /// Called with the initial point and every accepted iterate.
    std::function<void(const WeightVector&)> on_iterate;
};

struct WeightFit {
    WeightVector alpha = WeightVector::uniform(1);
    double val_bce = 0.0;
    double initial_bce = 0.0;
    int steps_used = 0;
    std::vector<std::string> warnings;
};

/// Projected gradient descent with step halving from uniform weights.
///
/// Each step tries alpha' = P(alpha - eta * grad) starting from
/// eta = step_size and halves eta while the objective increases (at most
/// max_halvings times). Stops when no halving yields a non-increase, when the
/// accepted step is below tolerance, or after `steps` steps. Throws
/// NumericError on a non-finite loss or gradient.
WeightFit optimize_weights(const PredictionMatrix& preds, std::span<const Label> labels,
                           const WeightOptions& options = {});

/// {"alpha":[...], "val_bce": x, "steps_used": n}
nlohmann::json to_json(const WeightFit& fit);

}  // namespace hde
