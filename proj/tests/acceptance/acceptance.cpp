// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gradcheck.hpp"
#include "hde/architectures.hpp"
#include "hde/gradcam.hpp"
#include "hde/image_io.hpp"
#include "hde/metrics.hpp"
#include "hde/pipeline.hpp"
#include "hde/split.hpp"
#include "hde/stacking.hpp"
#include "hde/synth.hpp"
#include "hde/training.hpp"
#include "hde/weighted_avg.hpp"
#include "oracles.hpp"

using namespace hde;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o)
{
    if (!o.pass) ++failures;
    std::cout << "CRITERION " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << name << ": " << o.detail
              << std::endl;
}

template <typename F>
void run_criterion(int id, const std::string& name, F&& body)
{
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    report(id, name, o);
}

std::string sci(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string fmt(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

SynthSpec blob_spec(std::uint64_t seed)
{
    SynthSpec s;
    s.subjects_per_class = 20;
    s.slices_per_subject = 4;
    s.image_side = 32;
    s.seed = seed;
    return s;
}

RunConfig run_config(std::uint64_t seed)
{
    RunConfig c;
    c.seed = seed;
    c.input_side = 32;
    c.folds = 5;
    return c;
}

std::vector<double> checksum(const MicroNet& net, std::size_t layer)
{
    const auto& l = net.layer(layer);
    std::vector<double> v(l.weight.values().begin(), l.weight.values().end());
    v.insert(v.end(), l.bias.values().begin(), l.bias.values().end());
    return v;
}

class MeanLabel : public BaseLearner {
public:
    std::vector<double> predict(std::span<const LabeledSample>, std::span<const std::size_t> idx) const override
    {
        return std::vector<double>(idx.size(), mean_);
    }

protected:
    void do_fit(std::span<const LabeledSample> s, std::span<const std::size_t> train) override
    {
        double t = 0.0;
        for (std::size_t i : train) t += to_target(s[i].label);
        mean_ = t / static_cast<double>(train.size());
    }

private:
    double mean_ = 0.0;
};

// Criterion 1 and 2 share the five seeded runs.
struct SeedRun {
    RunReport report;
    fs::path out;
    double seconds = 0.0;
};

Outcome structure(const SeedRun& run)
{
    Outcome o;
    const auto j = nlohmann::json::parse(oracle::slurp(run.out / "report.json"));
    const std::vector<std::string> names{"micro_a", "micro_b", "micro_c", "weighted", "stacked", "hybrid"};
    const auto& models = j.at("models");
    o.pass = models.size() == names.size();
    for (std::size_t i = 0; o.pass && i < names.size(); ++i) {
        o.pass = models[i].at("model") == names[i];
        for (const char* key : {"acc", "sen", "spe", "auc"}) o.pass = o.pass && models[i].contains(key);
    }
    const std::string table = oracle::slurp(run.out / "report.txt");
    for (const char* col : {"ACC", "SEN", "SPE", "AUC", "hybrid"}) o.pass = o.pass && table.find(col) != std::string::npos;
    std::size_t missing = 0;
    for (const auto& a : j.at("artifacts")) missing += !fs::exists(run.out / a.get<std::string>());
    o.pass = o.pass && missing == 0;
    o.detail = std::to_string(models.size()) + " model rows (3 base, weighted, stacked, hybrid), ACC/SEN/SPE/AUC columns, " +
               std::to_string(j.at("artifacts").size()) + " artifacts, " + std::to_string(missing) + " missing";
    return o;
}

Outcome dominance(const std::vector<SeedRun>& runs)
{
    Outcome o;
    double total = 0.0;
    std::ostringstream d;
    for (std::size_t s = 0; s < runs.size(); ++s) {
        const auto& r = runs[s].report;
        double best_acc = 0.0, best_auc = 0.0;
        for (const auto& row : r.rows) {
            if (row.kind != "base") continue;
            best_acc = std::max(best_acc, row.metrics.rates.accuracy);
            best_auc = std::max(best_auc, row.metrics.auc.value_or(0.0));
        }
        const auto& h = r.row("hybrid").metrics;
        const bool ok = h.rates.accuracy >= best_acc - 0.005 && h.auc.value_or(0.0) >= best_auc - 0.005;
        o.pass = o.pass && ok;
        total += runs[s].seconds;
        d << "seed " << s + 1 << " hybrid acc " << fmt(100 * h.rates.accuracy, 2) << "% (best base "
          << fmt(100 * best_acc, 2) << "%) auc " << fmt(h.auc.value_or(0.0)) << " (best base " << fmt(best_auc)
          << "); ";
    }
    d << "total runtime " << fmt(total, 1) << " s";
    o.pass = o.pass && total <= 300.0;
    o.detail = d.str();
    return o;
}

Outcome gradients()
{
    Outcome o;
    double worst_net = 0.0, worst_fusion = 0.0;
    std::size_t points = 0;
    auto net_with = [](std::vector<LayerSpec> middle) {
        std::vector<LayerSpec> specs{LayerSpec::conv(2, 3)};
        specs.insert(specs.end(), middle.begin(), middle.end());
        specs.push_back(LayerSpec::head());
        return MicroNet("probe", {1, 7, 7}, std::move(specs), 1);
    };
    struct Case {
        MicroNet net;
        bool training;
    };
    std::vector<Case> cases;
    cases.push_back({MicroNet("probe", {1, 7, 7}, {LayerSpec::conv(3, 3), LayerSpec::conv(2, 2), LayerSpec::head()}, 2), false});
    cases.push_back({net_with({LayerSpec::relu()}), false});
    cases.push_back({net_with({LayerSpec::maxpool()}), false});
    cases.push_back({net_with({LayerSpec::global_avg_pool()}), false});
    cases.push_back({net_with({LayerSpec::dense(4)}), false});
    cases.push_back({net_with({LayerSpec::dropout(0.5)}), true});
    cases.push_back({net_with({}), false});
    Rng rng(2024);
    for (auto& c : cases)
        for (int p = 0; p < 20; ++p, ++points)
            worst_net = std::max(worst_net, gradcheck::check_point(c.net, rng, 2, c.training).max_rel_error);

    for (int p = 0; p < 20; ++p) {
        const std::size_t n = 30, k = 3;
        PredictionMatrix x(n, k);
        std::vector<Label> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = uniform01(rng) < 0.5 ? Label::positive : Label::negative;
            for (std::size_t c = 0; c < k; ++c) x(i, c) = 0.02 + 0.96 * uniform01(rng);
        }
        std::vector<double> theta(k + 1);
        for (double& t : theta) t = 4.0 * uniform01(rng) - 2.0;
        auto meta_f = [&](const std::vector<double>& th) {
            return meta_loss(MetaLearner{{th.begin(), th.begin() + 3}, th[3]}, x, y, 0.1);
        };
        const auto g = meta_gradient(MetaLearner{{theta.begin(), theta.begin() + 3}, theta[3]}, x, y, 0.1);
        for (std::size_t c = 0; c <= k; ++c)
            worst_fusion = std::max(worst_fusion,
                                    oracle::relative_error(g[c], oracle::central_difference(meta_f, theta, c, 1e-6)));

        std::vector<double> a{uniform01(rng) + 0.1, uniform01(rng) + 0.1, uniform01(rng) + 0.1};
        const double s = a[0] + a[1] + a[2];
        for (double& v : a) v /= s;
        auto bce_f = [&](const std::vector<double>& z) {
            double t = 0.0;
            for (std::size_t i = 0; i < n; ++i) t += bce_loss(z[0] * x(i, 0) + z[1] * x(i, 1) + z[2] * x(i, 2), y[i]);
            return t / static_cast<double>(n);
        };
        const auto ga = mean_weighted_bce_gradient(a, x, y);
        for (std::size_t c = 0; c < k; ++c)
            worst_fusion = std::max(worst_fusion,
                                    oracle::relative_error(ga[c], oracle::central_difference(bce_f, a, c, 1e-6)));
    }
    o.pass = worst_net <= 1e-4 && worst_fusion <= 1e-5;
    o.detail = "7 layer kinds x 20 points (" + std::to_string(points) + "), max rel err " + sci(worst_net) +
               "; meta and BCE-in-alpha 20 points each, max rel err " + sci(worst_fusion);
    return o;
}

Outcome simplex()
{
    Outcome o;
    Rng rng(77);
    double worst_gap = 0.0, worst_sum = 0.0;
    bool negative = false;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 10 + uniform_index(rng, 90);
        PredictionMatrix x(n, 2);
        std::vector<Label> y(n);
        std::vector<double> p1(n), p2(n);
        std::vector<int> yi(n);
        for (std::size_t i = 0; i < n; ++i) {
            yi[i] = uniform01(rng) < 0.5;
            y[i] = yi[i] ? Label::positive : Label::negative;
            p1[i] = x(i, 0) = std::clamp(0.5 * yi[i] + 0.6 * uniform01(rng) - 0.05, 0.0, 1.0);
            p2[i] = x(i, 1) = uniform01(rng);
        }
        WeightOptions opt;
        opt.on_iterate = [&](const WeightVector& a) {
            worst_sum = std::max(worst_sum, std::abs(a[0] + a[1] - 1.0));
            negative = negative || a[0] < 0.0 || a[1] < 0.0;
        };
        const auto fit = optimize_weights(x, y, opt);
        worst_gap = std::max(worst_gap, std::abs(fit.val_bce - oracle::grid_min_bce(p1, p2, yi, 1e-3)));
    }
    o.pass = worst_gap <= 1e-4 && worst_sum <= 1e-12 && !negative;
    o.detail = "50 K=2 tables, max |BCE - grid min| " + sci(worst_gap) + ", max |sum-1| " +
               sci(worst_sum) + ", negative weights: " + (negative ? "yes" : "no");
    return o;
}

Outcome auc_oracle()
{
    Outcome o;
    Rng rng(5);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + uniform_index(rng, 199);
        std::vector<Label> y(n);
        std::vector<double> s(n);
        const std::uint64_t levels = 1 + uniform_index(rng, 20);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = i < 2 ? static_cast<Label>(i) : (uniform01(rng) < 0.4 ? Label::positive : Label::negative);
            s[i] = t % 2 ? static_cast<double>(uniform_index(rng, levels)) / static_cast<double>(levels) : uniform01(rng);
        }
        worst = std::max(worst, std::abs(auc(roc_curve(y, s)) - oracle::mann_whitney_auc(y, s)));
    }
    o.pass = worst <= 1e-12;
    o.detail = "200 instances (N <= 200, half with ties), max |trapezoid - Mann-Whitney| " + sci(worst);
    return o;
}

Outcome leakage(const fs::path& work)
{
    Outcome o;
    const fs::path data = work / "leak_data";
    SynthSpec spec = blob_spec(11);
    spec.subjects_per_class = 10;
    spec.slices_per_subject = 2;
    spec.image_side = 16;
    spec.radius_range = {2.0, 3.0};
    synth_data(spec, data);
    RunConfig config = run_config(11);
    config.input_side = 16;
    config.freeze_epochs = 3;
    config.finetune_epochs = 1;
    const BaseStage st = run_base_stage(config, data, work / "leak_out");
    const std::size_t pipeline_leaks = count_leaks(st.oof);
    // Subjects never straddle a fold boundary either.
    std::size_t straddling = 0;
    for (std::size_t r = 0; r < st.oof.matrix.rows(); ++r) {
        const auto& subject = st.samples[st.oof.sample_index[r]].subject_id;
        for (std::size_t m = 0; m < static_cast<std::size_t>(config.K); ++m)
            for (std::size_t i : st.oof.provenance(r, m)) straddling += st.samples[i].subject_id == subject;
    }

    std::vector<LabeledSample> s(9);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i].subject_id = "s" + std::to_string(i);
        s[i].label = i % 3 ? Label::negative : Label::positive;
        s[i].payload = std::vector<double>{};
    }
    FoldAssignment loo;
    loo.k = 9;
    for (std::size_t i = 0; i < 9; ++i) loo.indices.push_back(i), loo.fold_of.push_back(static_cast<int>(i));
    const auto table = oof_predictions(s, loo, 2, [](int, int) { return std::make_unique<MeanLabel>(); });
    const std::size_t loo_leaks = count_leaks(table);
    auto tampered = table;
    tampered.training_sets[3][0].push_back(tampered.sample_index[3]);
    const bool detects = count_leaks(tampered) == 1;

    o.pass = pipeline_leaks == 0 && straddling == 0 && loo_leaks == 0 && detects;
    o.detail = "pipeline OOF " + std::to_string(st.oof.matrix.rows()) + " rows x " + std::to_string(config.K) +
               " models: " + std::to_string(pipeline_leaks) + " leaks, " + std::to_string(straddling) +
               " same-subject training rows; leave-one-out 9 rows: " + std::to_string(loo_leaks) +
               " leaks; tampered record detected: " + (detects ? "yes" : "no");
    return o;
}

Outcome freezing()
{
    Outcome o;
    SynthSpec spec = blob_spec(3);
    spec.subjects_per_class = 6;
    const auto data = make_synthetic(spec);
    std::vector<std::size_t> train(data.samples.size());
    for (std::size_t i = 0; i < train.size(); ++i) train[i] = i;
    std::size_t checked = 0;
    for (int v = 0; v < kArchitectureVariants; ++v) {
        MicroNet net = make_architecture(v, 32, 0.5);
        Rng init(v + 1);
        net.initialize(init);
        const MicroNet initial = net;
        TrainOptions opt;
        opt.freeze_epochs = 3;
        opt.finetune_epochs = 0;
        Rng rng(v + 10);
        train_two_phase(net, data.samples, train, {}, opt, rng);
        for (std::size_t i = 0; i < net.head_start(); ++i, ++checked)
            o.pass = o.pass && checksum(net, i) == checksum(initial, i);

        MicroNet two = initial;
        opt.finetune_epochs = 2;
        Rng rng2(v + 10);
        train_two_phase(two, data.samples, train, {}, opt, rng2);
        MicroNet probe = initial;
        const auto unfrozen = unfreeze_top_conv(probe, opt.unfreeze_conv_layers);
        for (std::size_t i = 0; i < two.head_start(); ++i) {
            if (!two.layer(i).has_parameters()) continue;
            const bool moved = checksum(two, i) != checksum(initial, i);
            const bool should = std::find(unfrozen.begin(), unfrozen.end(), i) != unfrozen.end();
            o.pass = o.pass && moved == should;
        }
    }
    o.detail = "3 architectures: backbone blocks bit-identical after phase 1 (" + std::to_string(checked) +
               " layers compared); after phase 2 exactly the last conv layer differs";
    return o;
}

Outcome gradcam(const std::vector<SeedRun>& runs)
{
    Outcome o;
    Tensor a({1, 2, 2});
    a[0] = 1, a[1] = -1, a[2] = 2, a[3] = 0;
    const bool example = compute_cam({0.5}, a).map.pixels == std::vector<double>{0.5, 0.0, 1.0, 0.0};
    Tensor b({2, 1, 2});
    b[0] = 1.5, b[1] = -0.25, b[2] = -1.5, b[3] = 0.25;
    const auto cancel = compute_cam({1.0, 1.0}, b).map.pixels;
    const bool cancels = cancel == std::vector<double>{0.0, 0.0};

    // Emitted heatmaps of the acceptance runs.
    std::size_t emitted = 0, negative = 0;
    for (const auto& run : runs)
        for (const auto& e : run.report.explanations) {
            const Image raw = read_pgm(run.out / "explanations" / (e.stem + ".pgm"));
            for (double v : raw.pixels) negative += v < 0.0;
            ++emitted;
        }

    // Localization on zero-noise data: train on one draw, explain a fresh draw.
    SynthSpec spec = blob_spec(101);
    spec.noise_sigma = 0.0;
    const auto train_set = make_synthetic(spec);
    spec.seed = 202;
    const auto eval_set = make_synthetic(spec);
    std::vector<std::size_t> train(train_set.samples.size());
    for (std::size_t i = 0; i < train.size(); ++i) train[i] = i;
    const RunConfig cfg = run_config(101);
    CnnLearner learner(0, 32, cfg.dropout_rate, TrainOptions::from_config(cfg), derive_seed(101, "base"), {});
    learner.fit(train_set.samples, train);
    std::vector<std::size_t> all(eval_set.samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto probs = learner.predict(eval_set.samples, all);
    std::size_t positives = 0, hits = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (eval_set.samples[i].label != Label::positive || threshold(probs[i], 0.5) != Label::positive) continue;
        const auto cam = explain(learner.net(), eval_set.samples[i].image(), 1);
        for (double v : cam.map.pixels) negative += v < 0.0 || !std::isfinite(v);
        ++positives;
        const auto c = cam_centroid(cam.map);
        if (c && eval_set.truth[i].in_box(c->first, c->second, 2.0)) ++hits;
    }
    const double rate = positives ? static_cast<double>(hits) / static_cast<double>(positives) : 0.0;
    o.pass = example && cancels && negative == 0 && positives > 0 && rate >= 0.80;
    o.detail = std::string("2x2 examples exact: ") + (example && cancels ? "yes" : "no") + "; negative entries in " +
               std::to_string(emitted) + " emitted maps and " + std::to_string(positives) +
               " localization maps: " + std::to_string(negative) + "; centroid inside 2x box for " +
               std::to_string(hits) + "/" + std::to_string(positives) + " correctly classified positives (" +
               fmt(100.0 * rate, 1) + "%)";
    return o;
}

Outcome determinism(const fs::path& work, const SeedRun& first)
{
    Outcome o;
    const fs::path again = work / "rerun";
    fs::remove_all(again);
    run_pipeline(run_config(1), work / "data1", again);
    std::ostringstream d;
    for (const char* f : {"report.json", "weights.json", "oof.csv"}) {
        const bool same = oracle::slurp(first.out / f) == oracle::slurp(again / f);
        o.pass = o.pass && same;
        d << f << (same ? " identical; " : " DIFFERS; ");
    }
    o.detail = d.str() + "two runs, seed 1";
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance suite"};
    std::string work_dir = (fs::temp_directory_path() / "hde_acceptance").string();
    app.add_option("--work", work_dir, "scratch directory");
    CLI11_PARSE(app, argc, argv);
    const fs::path work(work_dir);
    fs::create_directories(work);

    std::vector<SeedRun> runs;
    std::string run_error;
    try {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const fs::path data = work / ("data" + std::to_string(seed));
            fs::remove_all(data);
            synth_data(blob_spec(seed), data);
            SeedRun r;
            r.out = work / ("run" + std::to_string(seed));
            fs::remove_all(r.out);
            const auto t0 = std::chrono::steady_clock::now();
            r.report = run_pipeline(run_config(seed), data, r.out);
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            runs.push_back(std::move(r));
        }
    } catch (const std::exception& e) {
        run_error = e.what();
    }
    auto need_runs = [&](auto&& f) {
        return [&, f]() -> Outcome {
            if (runs.size() < 5) return {false, "pipeline runs failed: " + run_error};
            return f();
        };
    };

    run_criterion(1, "report structure", need_runs([&] { return structure(runs.front()); }));
    run_criterion(2, "fusion dominance on synthetic data", need_runs([&] { return dominance(runs); }));
    run_criterion(3, "gradient oracles", gradients);
    run_criterion(4, "simplex optimizer", simplex);
    run_criterion(5, "AUC oracle equivalence", auc_oracle);
    run_criterion(6, "OOF leakage", [&] { return leakage(work); });
    run_criterion(7, "freezing contract", freezing);
    run_criterion(8, "Grad-CAM correctness and localization", [&] { return gradcam(runs); });
    run_criterion(9, "determinism", need_runs([&] { return determinism(work, runs.front()); }));

    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << std::endl;
    return failures == 0 ? 0 : 1;
}
