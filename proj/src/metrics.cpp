#include "hde/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "hde/errors.hpp"
#include "hde/predictions.hpp"

namespace hde {

std::vector<Label> threshold_all(std::span<const double> probs, double tau)
{
    std::vector<Label> out(probs.size());
    std::transform(probs.begin(), probs.end(), out.begin(),
                   [tau](double p) { return threshold(p, tau); });
    return out;
}

ConfusionMatrix confusion(std::span<const Label> labels, std::span<const Label> predictions)
{
    if (labels.size() != predictions.size()) {
        throw std::invalid_argument("confusion: " + std::to_string(labels.size()) + " labels vs " +
                                    std::to_string(predictions.size()) + " predictions");
    }
    if (labels.empty()) throw std::invalid_argument("confusion: no samples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool truth = labels[i] == Label::positive;
        const bool pred = predictions[i] == Label::positive;
        if (truth && pred) ++cm.tp;
        else if (truth) ++cm.fn;
        else if (pred) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

Rates acc_sen_spe(const ConfusionMatrix& cm)
{
    if (cm.total() == 0) throw std::invalid_argument("acc_sen_spe: empty confusion matrix");
    Rates r;
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.tp + cm.fn > 0)
        r.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (cm.tn + cm.fp > 0)
        r.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
    return r;
}

RocCurve roc_curve(std::span<const Label> labels, std::span<const double> scores)
{
    if (labels.size() != scores.size()) throw std::invalid_argument("roc_curve: length mismatch");
    const auto positives = static_cast<std::size_t>(
        std::count(labels.begin(), labels.end(), Label::positive));
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw DataError("ROC requires both classes, got " + std::to_string(positives) +
                        " positives and " + std::to_string(negatives) + " negatives");
    }

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        // Lower the threshold past every sample sharing this score at once.
        for (; i < order.size() && scores[order[i]] == s; ++i) {
            if (labels[order[i]] == Label::positive) ++tp;
            else ++fp;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                                static_cast<double>(tp) / static_cast<double>(positives)});
    }
    return curve;
}

double auc(const RocCurve& curve)
{
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    return area;
}

ModelMetrics evaluate_scores(std::span<const Label> labels, std::span<const double> scores,
                             double tau)
{
    ModelMetrics m;
    const auto preds = threshold_all(scores, tau);
    m.cm = confusion(labels, preds);
    m.rates = acc_sen_spe(m.cm);
    const bool both = std::count(labels.begin(), labels.end(), Label::positive) > 0 &&
                      std::count(labels.begin(), labels.end(), Label::negative) > 0;
    if (both) m.auc = auc(roc_curve(labels, scores));
    return m;
}

nlohmann::json to_json(const ModelMetrics& m)
{
    auto opt = [](const std::optional<double>& v) -> nlohmann::json {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    return nlohmann::json{{"acc", m.rates.accuracy}, {"sen", opt(m.rates.sensitivity)},
                          {"spe", opt(m.rates.specificity)}, {"auc", opt(m.auc)},
                          {"tp", m.cm.tp}, {"fp", m.cm.fp}, {"tn", m.cm.tn}, {"fn", m.cm.fn}};
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out << "fpr,tpr\n";
    for (const RocPoint& p : curve.points) out << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
    if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace hde
