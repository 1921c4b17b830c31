#include "hde/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hde/errors.hpp"
#include "hde/parallel.hpp"
#include "hde/predictions.hpp"

namespace hde {
namespace {

double sigmoid(double z)
{
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logit_of(const MetaLearner& m, std::span<const double> p)
{
    double z = m.b;
    for (std::size_t k = 0; k < p.size(); ++k) z += m.w[k] * p[k];
    return z;
}

// BCE written on the logit, stable for large |z|.
double bce_from_logit(double z, Label y)
{
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return y == Label::positive ? softplus - z : softplus;
}

}  // namespace

void BaseLearner::fit(std::span<const LabeledSample> samples,
                      std::span<const std::size_t> train_indices)
{
    trained_on_.assign(train_indices.begin(), train_indices.end());
    do_fit(samples, train_indices);
}

OofTable oof_predictions(std::span<const LabeledSample> samples, const FoldAssignment& folds,
                         int model_count, const BaseFactory& factory, int threads)
{
    if (model_count < 1) throw std::invalid_argument("oof_predictions: need at least one model");
    if (folds.k < 2 || folds.indices.size() != folds.fold_of.size()) {
        throw std::invalid_argument("oof_predictions: invalid fold assignment");
    }
    const auto k = static_cast<std::size_t>(model_count);

    OofTable table;
    table.sample_index = folds.indices;
    table.fold = folds.fold_of;
    table.matrix = PredictionMatrix(folds.indices.size(), k);
    table.labels.reserve(folds.indices.size());
    for (std::size_t idx : folds.indices) table.labels.push_back(samples[idx].label);
    table.training_sets.assign(static_cast<std::size_t>(folds.k),
                               std::vector<std::vector<std::size_t>>(k));

    // Row positions of each fold's members.
    std::vector<std::vector<std::size_t>> rows_of_fold(static_cast<std::size_t>(folds.k));
    for (std::size_t r = 0; r < folds.indices.size(); ++r)
        rows_of_fold[static_cast<std::size_t>(folds.fold_of[r])].push_back(r);
    for (int f = 0; f < folds.k; ++f) {
        if (rows_of_fold[static_cast<std::size_t>(f)].empty()) {
            throw DataError("fold " + std::to_string(f) + " is empty");
        }
    }

    const std::size_t jobs = static_cast<std::size_t>(folds.k) * k;
    parallel_for(jobs, threads, [&](std::size_t job) {
        const int f = static_cast<int>(job / k);
        const int m = static_cast<int>(job % k);
        try {
            const auto train = folds.complement(f);
            std::unique_ptr<BaseLearner> learner = factory(m, f);
            if (!learner) throw std::runtime_error("factory returned no learner");
            learner->fit(samples, train);
            const auto& rows = rows_of_fold[static_cast<std::size_t>(f)];
            std::vector<std::size_t> targets;
            targets.reserve(rows.size());
            for (std::size_t r : rows) targets.push_back(folds.indices[r]);
            const auto probs = learner->predict(samples, targets);
            if (probs.size() != rows.size()) throw std::runtime_error("learner returned wrong prediction count");
            for (std::size_t j = 0; j < rows.size(); ++j) {
                if (!(probs[j] >= 0.0 && probs[j] <= 1.0)) {
                    throw NumericError("prediction outside [0,1]");
                }
                table.matrix(rows[j], static_cast<std::size_t>(m)) = probs[j];
            }
            table.training_sets[static_cast<std::size_t>(f)][static_cast<std::size_t>(m)] =
                learner->trained_on();
        } catch (...) {
            rethrow_with_context("fold " + std::to_string(f) + ", model " + std::to_string(m));
        }
    });
    return table;
}

std::size_t count_leaks(const OofTable& table)
{
    std::size_t leaks = 0;
    for (std::size_t r = 0; r < table.sample_index.size(); ++r) {
        for (std::size_t m = 0; m < table.matrix.cols(); ++m) {
            const auto& trained = table.provenance(r, m);
            if (std::find(trained.begin(), trained.end(), table.sample_index[r]) != trained.end())
                ++leaks;
        }
    }
    return leaks;
}

double meta_predict(const MetaLearner& m, std::span<const double> p)
{
    if (p.size() != m.w.size()) {
        throw std::invalid_argument("meta_predict: " + std::to_string(m.w.size()) +
                                    " weights vs " + std::to_string(p.size()) + " inputs");
    }
    return sigmoid(logit_of(m, p));
}

double meta_loss(const MetaLearner& m, const PredictionMatrix& x, std::span<const Label> labels,
                 double l2)
{
    if (x.rows() != labels.size() || x.rows() == 0) throw std::invalid_argument("meta_loss: bad shapes");
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) total += bce_from_logit(logit_of(m, x.row(i)), labels[i]);
    double reg = 0.0;
    for (double w : m.w) reg += w * w;
    return total / static_cast<double>(x.rows()) + 0.5 * l2 * reg;
}

std::vector<double> meta_gradient(const MetaLearner& m, const PredictionMatrix& x,
                                  std::span<const Label> labels, double l2)
{
    if (x.rows() != labels.size() || x.rows() == 0) throw std::invalid_argument("meta_gradient: bad shapes");
    const std::size_t k = m.w.size();
    std::vector<double> grad(k + 1, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto p = x.row(i);
        const double r = sigmoid(logit_of(m, p)) - to_target(labels[i]);
        for (std::size_t j = 0; j < k; ++j) grad[j] += r * p[j];
        grad[k] += r;
    }
    const double n = static_cast<double>(x.rows());
    for (double& g : grad) g /= n;
    for (std::size_t j = 0; j < k; ++j) grad[j] += l2 * m.w[j];
    return grad;
}

MetaFit train_meta(const PredictionMatrix& x, std::span<const Label> labels,
                   const MetaOptions& options)
{
    if (x.rows() != labels.size()) throw std::invalid_argument("train_meta: row/label count mismatch");
    if (x.rows() == 0) throw std::invalid_argument("train_meta: no rows");
    if (options.learning_rate <= 0.0 || options.l2 < 0.0 || options.epochs < 0) {
        throw std::invalid_argument("train_meta: invalid options");
    }
    const std::size_t k = x.cols();
    MetaFit fit;
    fit.learner.w.assign(k, 0.0);

    double max_norm = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 1.0;
        for (double v : x.row(i)) s += v * v;
        max_norm = std::max(max_norm, s);
    }
    const double lipschitz = 0.25 * max_norm + options.l2;
    fit.effective_learning_rate = std::min(options.learning_rate, 1.0 / lipschitz);

    double loss = meta_loss(fit.learner, x, labels, options.l2);
    fit.initial_loss = loss;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        const auto grad = meta_gradient(fit.learner, x, labels, options.l2);
        for (std::size_t j = 0; j < k; ++j) fit.learner.w[j] -= fit.effective_learning_rate * grad[j];
        fit.learner.b -= fit.effective_learning_rate * grad[k];
        loss = meta_loss(fit.learner, x, labels, options.l2);
        if (!std::isfinite(loss)) {
            throw NumericError("meta-learner loss became non-finite at epoch " + std::to_string(epoch));
        }
    }
    fit.final_loss = loss;
    return fit;
}

double combine(double weighted, double stacked, CombineRule rule)
{
    switch (rule) {
    case CombineRule::mean: return 0.5 * (weighted + stacked);
    case CombineRule::weighted_only: return weighted;
    case CombineRule::stacked_only: return stacked;
    }
    throw ConfigError("unknown combine rule");
}

double hybrid_predict(const WeightVector& alpha, const MetaLearner& m, std::span<const double> p,
                      CombineRule rule)
{
    return combine(weighted_predict(alpha, p), meta_predict(m, p), rule);
}

nlohmann::json to_json(const MetaLearner& m)
{
    return nlohmann::json{{"w", m.w}, {"b", m.b}};
}

MetaLearner meta_from_json(const nlohmann::json& j)
{
    try {
        MetaLearner m;
        j.at("w").get_to(m.w);
        j.at("b").get_to(m.b);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad meta-learner JSON: ") + e.what());
    }
}

void write_oof_csv(const std::filesystem::path& path, const OofTable& table,
                   std::span<const std::string> row_ids)
{
    if (row_ids.size() != table.matrix.rows()) throw std::invalid_argument("write_oof_csv: id count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out << "id,fold";
    for (std::size_t c = 0; c < table.matrix.cols(); ++c) out << ",p" << c + 1;
    out << ",label\n";
    for (std::size_t r = 0; r < table.matrix.rows(); ++r) {
        out << row_ids[r] << ',' << table.fold[r];
        for (double p : table.matrix.row(r)) out << ',' << format_double(p);
        out << ',' << to_int(table.labels[r]) << '\n';
    }
    if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace hde
