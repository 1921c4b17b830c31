#include <doctest.h>

#include <atomic>
#include <cmath>

#include "hde/errors.hpp"
#include "hde/rng.hpp"
#include "hde/stacking.hpp"
#include "oracles.hpp"

using namespace hde;

namespace {

// Predicts the mean training label (plus a per-model offset) for everything.
class MeanLabel : public BaseLearner {
public:
    explicit MeanLabel(double offset = 0.0) : offset_(offset) {}
    std::vector<double> predict(std::span<const LabeledSample>, std::span<const std::size_t> idx) const override
    {
        return std::vector<double>(idx.size(), mean_ * (1.0 - offset_));
    }

protected:
    void do_fit(std::span<const LabeledSample> s, std::span<const std::size_t> train) override
    {
        double t = 0.0;
        for (std::size_t i : train) t += to_target(s[i].label);
        mean_ = t / static_cast<double>(train.size());
    }

private:
    double offset_;
    double mean_ = 0.0;
};

class Failing : public BaseLearner {
public:
    std::vector<double> predict(std::span<const LabeledSample>, std::span<const std::size_t> idx) const override
    {
        return std::vector<double>(idx.size(), 0.5);
    }

protected:
    void do_fit(std::span<const LabeledSample>, std::span<const std::size_t>) override
    {
        throw DataError("cannot fit");
    }
};

std::vector<LabeledSample> samples(const std::vector<int>& labels)
{
    std::vector<LabeledSample> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        LabeledSample s;
        s.subject_id = "s" + std::to_string(i);
        s.label = labels[i] ? Label::positive : Label::negative;
        s.payload = std::vector<double>{};
        out.push_back(s);
    }
    return out;
}

FoldAssignment folds(std::vector<int> fold_of)
{
    FoldAssignment f;
    f.k = *std::max_element(fold_of.begin(), fold_of.end()) + 1;
    for (std::size_t i = 0; i < fold_of.size(); ++i) f.indices.push_back(i);
    f.fold_of = std::move(fold_of);
    return f;
}

PredictionMatrix matrix(const std::vector<std::vector<double>>& rows)
{
    PredictionMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
    return m;
}

}  // namespace

TEST_CASE("oof: mean-label learner on the four-sample example")
{
    const auto s = samples({1, 1, 0, 0});
    const auto f = folds({0, 1, 1, 0});  // fold0 = {s0, s3}, fold1 = {s1, s2}
    const auto table = oof_predictions(s, f, 2, [](int, int) { return std::make_unique<MeanLabel>(); });
    REQUIRE(table.matrix.rows() == 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t k = 0; k < 2; ++k) CHECK(table.matrix(r, k) == 0.5);
    CHECK(count_leaks(table) == 0);
}

TEST_CASE("oof: provenance excludes the predicted row, leave-one-out included")
{
    const auto s = samples({1, 0, 1, 0, 1, 1, 0});
    const auto loo = folds({0, 1, 2, 3, 4, 5, 6});
    const auto table = oof_predictions(s, loo, 3, [](int m, int) { return std::make_unique<MeanLabel>(0.1 * m); }, 3);
    CHECK(count_leaks(table) == 0);
    for (std::size_t r = 0; r < table.matrix.rows(); ++r) {
        for (std::size_t m = 0; m < 3; ++m) {
            const auto& train = table.provenance(r, m);
            CHECK(train.size() == s.size() - 1);
            CHECK(std::find(train.begin(), train.end(), table.sample_index[r]) == train.end());
        }
    }
    // Value check: row i sees the mean of the other six labels.
    for (std::size_t r = 0; r < table.matrix.rows(); ++r) {
        const double others = (4.0 - to_target(s[table.sample_index[r]].label)) / 6.0;
        CHECK(table.matrix(r, 0) == doctest::Approx(others).epsilon(1e-15));
    }
    // A corrupted provenance record is detected.
    auto tampered = table;
    tampered.training_sets[0][1].push_back(tampered.sample_index[0]);
    CHECK(count_leaks(tampered) == 1);
}

TEST_CASE("oof: thread count does not change the table")
{
    const auto s = samples({1, 0, 1, 0, 1, 1, 0, 0, 1});
    const auto f = folds({0, 1, 2, 0, 1, 2, 0, 1, 2});
    auto factory = [](int m, int) { return std::make_unique<MeanLabel>(0.05 * m); };
    const auto a = oof_predictions(s, f, 3, factory, 1);
    const auto b = oof_predictions(s, f, 3, factory, 4);
    CHECK(a.matrix.data() == b.matrix.data());
    CHECK(a.training_sets == b.training_sets);
}

TEST_CASE("oof: factory failures carry fold and model")
{
    const auto s = samples({1, 0, 1, 0});
    const auto f = folds({0, 1, 0, 1});
    try {
        oof_predictions(s, f, 2, [](int m, int fold) -> std::unique_ptr<BaseLearner> {
            if (m == 1 && fold == 1) return std::make_unique<Failing>();
            return std::make_unique<MeanLabel>();
        });
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("fold 1") != std::string::npos);
        CHECK(msg.find("model 1") != std::string::npos);
    }
}

TEST_CASE("meta_predict")
{
    MetaLearner zero{{0.0, 0.0, 0.0}, 0.0};
    CHECK(meta_predict(zero, std::vector<double>{0.2, 0.9, 0.4}) == 0.5);
    MetaLearner big{{50.0, 0.0}, 0.0};
    CHECK(meta_predict(big, std::vector<double>{1.0, 0.3}) > 0.99);
    MetaLearner ex{{1.0, 1.0}, -1.0};
    CHECK(meta_predict(ex, std::vector<double>{0.5, 0.5}) == 0.5);
    CHECK_THROWS_AS(meta_predict(ex, std::vector<double>{0.5}), std::invalid_argument);
}

TEST_CASE("meta gradient matches central differences")
{
    Rng rng(21);
    for (int point = 0; point < 20; ++point) {
        const std::size_t n = 25, k = 3;
        PredictionMatrix x(n, k);
        std::vector<Label> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = uniform01(rng) < 0.5 ? Label::positive : Label::negative;
            for (std::size_t c = 0; c < k; ++c) x(i, c) = uniform01(rng);
        }
        const double l2 = point % 2 ? 0.3 : 0.0;
        std::vector<double> theta(k + 1);
        for (double& t : theta) t = 4.0 * uniform01(rng) - 2.0;
        auto f = [&](const std::vector<double>& th) {
            MetaLearner m{{th.begin(), th.begin() + static_cast<std::ptrdiff_t>(k)}, th[k]};
            return meta_loss(m, x, y, l2);
        };
        MetaLearner m{{theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(k)}, theta[k]};
        const auto g = meta_gradient(m, x, y, l2);
        for (std::size_t c = 0; c <= k; ++c)
            CHECK(oracle::relative_error(g[c], oracle::central_difference(f, theta, c, 1e-6)) <= 1e-5);
    }
}

TEST_CASE("train_meta: separable pair, ridge limit and intercept-only optimum")
{
    const auto sep = matrix({{1, 1, 1}, {0, 0, 0}});
    const std::vector<Label> ys{Label::positive, Label::negative};
    const auto fit = train_meta(sep, ys);
    CHECK(meta_predict(fit.learner, sep.row(0)) > 0.5);
    CHECK(meta_predict(fit.learner, sep.row(1)) < 0.5);
    CHECK(fit.final_loss <= fit.initial_loss);

    MetaOptions ridge;
    ridge.l2 = 1e6;
    const auto r = train_meta(sep, ys, ridge);
    double norm = 0.0;
    for (double w : r.learner.w) norm += w * w;
    CHECK(std::sqrt(norm) <= 1e-3);

    // One constant column: prediction converges to the positive rate.
    PredictionMatrix c(10, 1, 0.4);
    std::vector<Label> yc(10, Label::negative);
    for (int i = 0; i < 3; ++i) yc[static_cast<std::size_t>(i)] = Label::positive;
    MetaOptions longer;
    longer.epochs = 20000;
    const auto ic = train_meta(c, yc, longer);
    CHECK(meta_predict(ic.learner, c.row(0)) == doctest::Approx(0.3).epsilon(1e-3));
}

TEST_CASE("train_meta: loss never increases")
{
    Rng rng(5);
    PredictionMatrix x(40, 3);
    std::vector<Label> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = i % 3 ? Label::negative : Label::positive;
        for (std::size_t c = 0; c < 3; ++c) x(i, c) = uniform01(rng);
    }
    double last = INFINITY;
    for (int e : {0, 1, 2, 5, 10, 50, 200, 1000}) {
        MetaOptions o;
        o.epochs = e;
        o.learning_rate = 50.0;  // capped internally
        const double loss = train_meta(x, y, o).final_loss;
        CHECK(loss <= last + 1e-15);
        last = loss;
    }
}

TEST_CASE("hybrid combination")
{
    CHECK(combine(0.8, 0.6, CombineRule::mean) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(combine(0.6, 0.8, CombineRule::mean) == combine(0.8, 0.6, CombineRule::mean));
    CHECK(combine(0.3, 0.3, CombineRule::mean) == 0.3);
    CHECK(combine(0.8, 0.6, CombineRule::weighted_only) == 0.8);
    CHECK(combine(0.8, 0.6, CombineRule::stacked_only) == 0.6);
    const WeightVector a({0.25, 0.75});
    const MetaLearner m{{1.0, -1.0}, 0.2};
    const std::vector<double> p{0.4, 0.9};
    CHECK(hybrid_predict(a, m, p, CombineRule::weighted_only) == weighted_predict(a, p));
    CHECK(hybrid_predict(a, m, p, CombineRule::stacked_only) == meta_predict(m, p));
    CHECK_THROWS_AS(parse_combine_rule("median"), ConfigError);
}

TEST_CASE("meta json round trip")
{
    const MetaLearner m{{0.1, -2.5, 1.0 / 3.0}, 0.75};
    const auto back = meta_from_json(to_json(m));
    CHECK(back.w == m.w);
    CHECK(back.b == m.b);
}
