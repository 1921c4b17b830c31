#include "hde/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "hde/architectures.hpp"
#include "hde/checkpoint.hpp"
#include "hde/errors.hpp"
#include "hde/gradcam.hpp"
#include "hde/image_io.hpp"
#include "hde/parallel.hpp"
#include "hde/rng.hpp"

namespace hde {
namespace fs = std::filesystem;

namespace {

template <typename F>
decltype(auto) stage(const char* name, F&& f)
{
    try {
        return f();
    } catch (...) {
        rethrow_with_context(std::string("stage '") + name + "'");
    }
}

void write_json(const fs::path& path, const nlohmann::json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out) throw DataError(path.string() + ": write failed");
}

std::vector<Label> labels_at(std::span<const LabeledSample> samples, std::span<const std::size_t> idx)
{
    std::vector<Label> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(samples[i].label);
    return out;
}

PredictionMatrix predict_all(const std::vector<std::unique_ptr<CnnLearner>>& learners,
                             std::span<const LabeledSample> samples, std::span<const std::size_t> idx)
{
    PredictionMatrix m(idx.size(), learners.size());
    for (std::size_t k = 0; k < learners.size(); ++k) {
        const auto p = learners[k]->predict(samples, idx);
        for (std::size_t r = 0; r < idx.size(); ++r) m(r, k) = p[r];
    }
    return m;
}

PredictionTable make_table(std::span<const std::string> ids, std::span<const std::size_t> idx,
                           PredictionMatrix matrix, std::vector<Label> labels)
{
    PredictionTable t;
    for (std::size_t i : idx) t.ids.push_back(ids[i]);
    t.matrix = std::move(matrix);
    t.labels = std::move(labels);
    return t;
}

bool is_constant(std::span<const double> v)
{
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

// Scores per model at unit level, evaluated into report rows.
void add_rows(RunReport& report, const Units& units, const std::vector<std::string>& names,
              const std::vector<std::string>& kinds, const std::vector<std::vector<double>>& row_scores,
              const fs::path& out_dir)
{
    for (std::size_t m = 0; m < names.size(); ++m) {
        const auto scores = aggregate_scores(units, row_scores[m]);
        ReportRow row;
        row.model = names[m];
        row.kind = kinds[m];
        row.metrics = evaluate_scores(units.labels, scores, report.threshold);
        if (is_constant(scores)) report.warnings.push_back(names[m] + ": constant scores, AUC is chance level");
        if (!out_dir.empty() && row.metrics.auc) {
            row.roc_file = "roc_" + names[m] + ".csv";
            write_roc_csv(out_dir / row.roc_file, roc_curve(units.labels, scores));
            report.artifacts.push_back(row.roc_file);
        }
        report.rows.push_back(std::move(row));
    }
}

// Base columns plus the three fusion outputs.
void add_model_rows(RunReport& report, const Units& units, const PredictionMatrix& x,
                    const std::vector<std::string>& base_names, const std::optional<FusionModel>& fusion,
                    const fs::path& out_dir)
{
    std::vector<std::string> names = base_names;
    std::vector<std::string> kinds(base_names.size(), "base");
    std::vector<std::vector<double>> scores;
    for (std::size_t k = 0; k < x.cols(); ++k) scores.push_back(x.column(k));
    if (fusion) {
        FusedScores f = apply_fusion(*fusion, x);
        for (const char* n : {"weighted", "stacked", "hybrid"}) {
            names.emplace_back(n);
            kinds.emplace_back(n);
        }
        scores.push_back(std::move(f.weighted));
        scores.push_back(std::move(f.stacked));
        scores.push_back(std::move(f.hybrid));
    }
    add_rows(report, units, names, kinds, scores, out_dir);
}

std::vector<std::string> column_names(std::size_t k)
{
    std::vector<std::string> out;
    for (std::size_t c = 0; c < k; ++c) out.push_back("p" + std::to_string(c + 1));
    return out;
}

RunReport report_header(const RunConfig& config, const std::string& set, const std::string& aggregation)
{
    RunReport r;
    r.experiment = config.experiment;
    r.seed = config.seed;
    to_json(r.config, config);
    r.evaluation_set = set;
    r.aggregation = aggregation;
    r.threshold = config.threshold;
    return r;
}

void write_fusion_files(const fs::path& out_dir, const FusionModel& fusion, RunReport& report)
{
    write_json(out_dir / "weights.json", to_json(fusion.weights));
    report.artifacts.push_back("weights.json");
    nlohmann::json meta = to_json(fusion.meta.learner);
    meta["train_loss"] = fusion.meta.final_loss;
    meta["effective_learning_rate"] = fusion.meta.effective_learning_rate;
    write_json(out_dir / "meta.json", meta);
    report.artifacts.push_back("meta.json");
}

std::pair<std::string, std::string> class_names(const std::string& experiment)
{
    const auto pos = experiment.find("_vs_");
    if (pos == std::string::npos) return {"positive", "negative"};
    return {experiment.substr(0, pos), experiment.substr(pos + 4)};
}

}  // namespace

FusionModel fit_fusion(const PredictionMatrix& weight_x, std::span<const Label> weight_y,
                       const PredictionMatrix& meta_x, std::span<const Label> meta_y,
                       const RunConfig& config)
{
    FusionModel m;
    WeightOptions wo;
    wo.steps = config.weight_steps;
    wo.step_size = config.weight_step_size;
    m.weights = optimize_weights(weight_x, weight_y, wo);
    MetaOptions mo;
    mo.epochs = config.meta_epochs;
    mo.learning_rate = config.meta_learning_rate;
    mo.l2 = config.meta_l2;
    m.meta = train_meta(meta_x, meta_y, mo);
    m.rule = config.fusion_combine_rule;
    return m;
}

FusedScores apply_fusion(const FusionModel& model, const PredictionMatrix& x)
{
    FusedScores out;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto p = x.row(i);
        const double w = weighted_predict(model.weights.alpha, p);
        const double s = meta_predict(model.meta.learner, p);
        out.weighted.push_back(w);
        out.stacked.push_back(s);
        out.hybrid.push_back(combine(w, s, model.rule));
    }
    return out;
}

const ReportRow& RunReport::row(const std::string& model) const
{
    for (const auto& r : rows)
        if (r.model == model) return r;
    throw std::invalid_argument("no report row '" + model + "'");
}

nlohmann::json to_json(const RunReport& report)
{
    const auto [pos, neg] = class_names(report.experiment);
    nlohmann::json j;
    j["experiment"] = report.experiment;
    j["classes"] = {{"positive", pos}, {"negative", neg}};
    j["seed"] = report.seed;
    j["config"] = report.config;
    j["evaluation"] = {{"set", report.evaluation_set},
                       {"aggregation", report.aggregation},
                       {"units", report.evaluated_units},
                       {"threshold", report.threshold}};
    nlohmann::json models = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json row = to_json(r.metrics);
        row["model"] = r.model;
        row["kind"] = r.kind;
        row["roc"] = r.roc_file.empty() ? nlohmann::json() : nlohmann::json(r.roc_file);
        models.push_back(std::move(row));
    }
    j["models"] = std::move(models);
    if (report.fusion) {
        j["weights"] = to_json(report.fusion->weights);
        j["meta"] = to_json(report.fusion->meta.learner);
        j["combine_rule"] = to_string(report.fusion->rule);
    }
    if (!report.gradcam_model.empty()) {
        nlohmann::json aucs = nlohmann::json::array();
        for (double a : report.val_auc) aucs.push_back(std::isnan(a) ? nlohmann::json() : nlohmann::json(a));
        nlohmann::json ex = nlohmann::json::array();
        for (const auto& e : report.explanations)
            ex.push_back({{"class_id", e.class_id}, {"sample", e.sample_id}, {"stem", e.stem}});
        j["gradcam"] = {{"model", report.gradcam_model}, {"val_auc", aucs}, {"explanations", ex}};
    }
    j["artifacts"] = report.artifacts;
    j["warnings"] = report.warnings;
    return j;
}

std::string render_table(const RunReport& report)
{
    const auto [pos, neg] = class_names(report.experiment);
    std::ostringstream out;
    out << report.experiment << " (positive: " << pos << ", negative: " << neg << ")\n";
    out << "evaluated on " << report.evaluation_set << ", " << report.evaluated_units << " units ("
        << report.aggregation << "), threshold " << report.threshold << "\n\n";
    char line[128];
    std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %8s\n", "model", "ACC(%)", "SEN(%)", "SPE(%)", "AUC");
    out << line;
    auto pct = [](const std::optional<double>& v) {
        char buf[16];
        if (!v) return std::string("n/a");
        std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *v);
        return std::string(buf);
    };
    for (const auto& r : report.rows) {
        char auc_buf[16] = "n/a";
        if (r.metrics.auc) std::snprintf(auc_buf, sizeof auc_buf, "%.4f", *r.metrics.auc);
        std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %8s\n", r.model.c_str(),
                      pct(r.metrics.rates.accuracy).c_str(), pct(r.metrics.rates.sensitivity).c_str(),
                      pct(r.metrics.rates.specificity).c_str(), auc_buf);
        out << line;
    }
    if (report.fusion) {
        out << "\nalpha:";
        for (double a : report.fusion->weights.alpha.values()) out << ' ' << format_double(a);
        out << "\n";
    }
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    return out.str();
}

void write_report(const fs::path& out_dir, RunReport& report)
{
    for (const char* name : {"report.json", "report.txt"})
        if (std::find(report.artifacts.begin(), report.artifacts.end(), name) == report.artifacts.end())
            report.artifacts.emplace_back(name);
    write_json(out_dir / "report.json", to_json(report));
    std::ofstream txt(out_dir / "report.txt", std::ios::binary);
    if (!txt) throw DataError((out_dir / "report.txt").string() + ": cannot open for writing");
    txt << render_table(report);
}

Units group_units(std::span<const std::string> subject_of_row, std::span<const Label> labels,
                  Aggregation aggregation)
{
    if (subject_of_row.size() != labels.size()) throw std::invalid_argument("group_units: length mismatch");
    Units u;
    if (aggregation == Aggregation::slice) {
        for (std::size_t r = 0; r < labels.size(); ++r) {
            u.ids.push_back(subject_of_row[r]);
            u.labels.push_back(labels[r]);
            u.members.push_back({r});
        }
        return u;
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < labels.size(); ++r) groups[subject_of_row[r]].push_back(r);
    for (auto& [id, rows] : groups) {
        for (std::size_t r : rows)
            if (labels[r] != labels[rows.front()]) throw DataError("subject '" + id + "' has mixed labels");
        u.ids.push_back(id);
        u.labels.push_back(labels[rows.front()]);
        u.members.push_back(std::move(rows));
    }
    return u;
}

std::vector<double> aggregate_scores(const Units& units, std::span<const double> scores)
{
    std::vector<double> out;
    out.reserve(units.members.size());
    for (const auto& rows : units.members) {
        double s = 0.0;
        for (std::size_t r : rows) s += scores[r];
        out.push_back(s / static_cast<double>(rows.size()));
    }
    return out;
}

std::string base_model_id(int k)
{
    return architecture_name(k);
}

BaseStage run_base_stage(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir)
{
    config.validate();
    BaseStage st;
    fs::create_directories(out_dir);

    stage("load", [&] {
        st.samples = load_image_dir(data_dir, config.input_side);
        for (const auto& s : st.samples) st.sample_ids.push_back(s.subject_id + "_" + std::to_string(s.slice_index));
    });
    stage("split", [&] {
        st.split = split_dataset(st.samples, config.split_ratios, derive_seed(config.seed, "split"));
        nlohmann::json j;
        auto names = [&](const std::vector<std::size_t>& idx) {
            std::vector<std::string> out;
            for (std::size_t i : idx) out.push_back(st.sample_ids[i]);
            return out;
        };
        j["train"] = names(st.split.train_ids);
        j["val"] = names(st.split.val_ids);
        j["test"] = names(st.split.test_ids);
        write_json(out_dir / "split.json", j);
        st.artifacts.push_back("split.json");
    });

    const TrainOptions options = TrainOptions::from_config(config);
    stage("train-base", [&] {
        st.learners.resize(static_cast<std::size_t>(config.K));
        parallel_for(st.learners.size(), config.threads, [&](std::size_t k) {
            try {
                auto learner = std::make_unique<CnnLearner>(static_cast<int>(k), config.input_side,
                                                            config.dropout_rate, options,
                                                            derive_seed(config.seed, "base", k), st.split.val_ids);
                learner->fit(st.samples, st.split.train_ids);
                st.learners[k] = std::move(learner);
            } catch (...) {
                rethrow_with_context("model " + base_model_id(static_cast<int>(k)));
            }
        });
        fs::create_directories(out_dir / "checkpoints");
        for (std::size_t k = 0; k < st.learners.size(); ++k) {
            const std::string rel = "checkpoints/" + base_model_id(static_cast<int>(k)) + ".ckpt";
            save_checkpoint(out_dir / rel, st.learners[k]->net());
            st.artifacts.push_back(rel);
        }
        st.val_predictions = predict_all(st.learners, st.samples, st.split.val_ids);
        st.test_predictions = predict_all(st.learners, st.samples, st.split.test_ids);
        st.val_predictions.validate();
        st.test_predictions.validate();
        write_predictions_csv(out_dir / "predictions_val.csv",
                              make_table(st.sample_ids, st.split.val_ids, st.val_predictions,
                                         labels_at(st.samples, st.split.val_ids)));
        write_predictions_csv(out_dir / "predictions_test.csv",
                              make_table(st.sample_ids, st.split.test_ids, st.test_predictions,
                                         labels_at(st.samples, st.split.test_ids)));
        st.artifacts.push_back("predictions_val.csv");
        st.artifacts.push_back("predictions_test.csv");
    });

    stage("oof", [&] {
        st.folds = assign_folds(st.samples, st.split.train_ids, config.folds, derive_seed(config.seed, "folds"));
        const BaseFactory factory = [&](int model, int fold) -> std::unique_ptr<BaseLearner> {
            return std::make_unique<CnnLearner>(model, config.input_side, config.dropout_rate, options,
                                                derive_seed(config.seed, "oof", static_cast<std::uint64_t>(model),
                                                            static_cast<std::uint64_t>(fold)),
                                                std::vector<std::size_t>{});
        };
        st.oof = oof_predictions(st.samples, st.folds, config.K, factory, config.threads);
        std::vector<std::string> row_ids;
        for (std::size_t i : st.oof.sample_index) row_ids.push_back(st.sample_ids[i]);
        write_oof_csv(out_dir / "oof.csv", st.oof, row_ids);
        st.artifacts.push_back("oof.csv");
    });
    return st;
}

RunReport run_pipeline(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir)
{
    BaseStage st = run_base_stage(config, data_dir, out_dir);
    RunReport report = report_header(config, "test", to_string(config.aggregation));
    report.artifacts = st.artifacts;

    const auto val_labels = labels_at(st.samples, st.split.val_ids);
    const auto test_labels = labels_at(st.samples, st.split.test_ids);

    stage("fuse", [&] {
        report.fusion = fit_fusion(st.val_predictions, val_labels, st.oof.matrix, st.oof.labels, config);
        for (const auto& w : report.fusion->weights.warnings) report.warnings.push_back("weights: " + w);
        write_fusion_files(out_dir, *report.fusion, report);
    });

    std::vector<std::string> base_names;
    for (int k = 0; k < config.K; ++k) base_names.push_back(base_model_id(k));

    stage("evaluate", [&] {
        std::vector<std::string> subjects;
        for (std::size_t i : st.split.test_ids) subjects.push_back(st.samples[i].subject_id);
        const Units units = group_units(subjects, test_labels, config.aggregation);
        report.evaluated_units = units.ids.size();
        add_model_rows(report, units, st.test_predictions, base_names, report.fusion,
                       config.roc_from_folds ? fs::path() : out_dir);

        if (config.roc_from_folds) {
            // Pooled out-of-fold scores; the meta-learner is cross-fitted so
            // no row is scored by a meta model that saw it.
            const OofTable& oof = st.oof;
            FusedScores pooled = apply_fusion(*report.fusion, oof.matrix);
            MetaOptions mo{config.meta_epochs, config.meta_learning_rate, config.meta_l2};
            for (int f = 0; f < st.folds.k; ++f) {
                std::vector<std::size_t> in, out;
                for (std::size_t r = 0; r < oof.fold.size(); ++r) (oof.fold[r] == f ? out : in).push_back(r);
                std::vector<Label> in_labels;
                for (std::size_t r : in) in_labels.push_back(oof.labels[r]);
                const MetaFit fit = train_meta(oof.matrix.select_rows(in), in_labels, mo);
                for (std::size_t r : out) {
                    pooled.stacked[r] = meta_predict(fit.learner, oof.matrix.row(r));
                    pooled.hybrid[r] = combine(pooled.weighted[r], pooled.stacked[r], config.fusion_combine_rule);
                }
            }
            std::vector<std::string> oof_subjects;
            for (std::size_t i : oof.sample_index) oof_subjects.push_back(st.samples[i].subject_id);
            const Units ou = group_units(oof_subjects, oof.labels, config.aggregation);
            std::vector<std::vector<double>> cols;
            for (std::size_t k = 0; k < oof.matrix.cols(); ++k) cols.push_back(oof.matrix.column(k));
            cols.push_back(pooled.weighted);
            cols.push_back(pooled.stacked);
            cols.push_back(pooled.hybrid);
            std::vector<std::string> names = base_names;
            names.insert(names.end(), {"weighted", "stacked", "hybrid"});
            for (std::size_t m = 0; m < names.size(); ++m) {
                const std::string rel = "roc_" + names[m] + ".csv";
                write_roc_csv(out_dir / rel, roc_curve(ou.labels, aggregate_scores(ou, cols[m])));
                report.rows[m].roc_file = rel;
                report.artifacts.push_back(rel);
            }
        }
    });

    stage("explain", [&] {
        report.val_auc.clear();
        for (std::size_t k = 0; k < st.learners.size(); ++k) {
            const auto m = evaluate_scores(val_labels, st.val_predictions.column(k), config.threshold);
            report.val_auc.push_back(m.auc.value_or(std::numeric_limits<double>::quiet_NaN()));
        }
        std::size_t chosen = 0;
        if (config.gradcam_model >= 0) {
            chosen = static_cast<std::size_t>(config.gradcam_model);
        } else {
            double best = -1.0;
            for (std::size_t k = 0; k < report.val_auc.size(); ++k) {
                if (!std::isnan(report.val_auc[k]) && report.val_auc[k] > best) {
                    best = report.val_auc[k];
                    chosen = k;
                }
            }
        }
        report.gradcam_model = base_model_id(static_cast<int>(chosen));
        const MicroNet& net = st.learners[chosen]->net();
        const fs::path dir = out_dir / "explanations";
        for (int cls = 0; cls < 2; ++cls) {
            // Most confident test slice of this class under the chosen model.
            std::optional<std::size_t> pick;
            double best = -1.0;
            for (std::size_t r = 0; r < st.split.test_ids.size(); ++r) {
                if (to_int(test_labels[r]) != cls) continue;
                const double p = st.test_predictions(r, chosen);
                const double conf = cls == 1 ? p : 1.0 - p;
                if (conf > best) {
                    best = conf;
                    pick = r;
                }
            }
            if (!pick) {
                report.warnings.push_back("no test sample of class " + std::to_string(cls) + " to explain");
                continue;
            }
            const std::size_t idx = st.split.test_ids[*pick];
            const Image& image = st.samples[idx].image();
            const CamHeatmap cam = explain(net, image, cls);
            ExplanationRecord rec;
            rec.class_id = cls;
            rec.sample_id = st.sample_ids[idx];
            rec.stem = report.gradcam_model + "_class" + std::to_string(cls) + "_" + rec.sample_id;
            export_explanation(dir, rec.stem, cam, image, report.gradcam_model);
            for (const char* ext : {".ppm", ".pgm", ".json"}) report.artifacts.push_back("explanations/" + rec.stem + ext);
            report.explanations.push_back(std::move(rec));
        }
    });

    stage("report", [&] { write_report(out_dir, report); });
    return report;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fuse_holdout_rows(std::span<const Label> labels,
                                                                                double fit_fraction,
                                                                                std::uint64_t seed)
{
    std::vector<std::size_t> fit, eval;
    Rng rng = make_rng(seed, "fuse-holdout");
    for (Label cls : {Label::negative, Label::positive}) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < labels.size(); ++r)
            if (labels[r] == cls) rows.push_back(r);
        shuffle(rows, rng);
        auto n_fit = static_cast<std::size_t>(std::llround(fit_fraction * static_cast<double>(rows.size())));
        if (rows.size() >= 2) n_fit = std::clamp<std::size_t>(n_fit, 1, rows.size() - 1);
        fit.insert(fit.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_fit));
        eval.insert(eval.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_fit), rows.end());
    }
    std::sort(fit.begin(), fit.end());
    std::sort(eval.begin(), eval.end());
    return {fit, eval};
}

RunReport fuse_only(const PredictionTable& table, const RunConfig& config)
{
    return fuse_only(table, config, fs::path());
}

RunReport fuse_only(const PredictionTable& table, const RunConfig& config, const fs::path& out_dir)
{
    config.validate();
    if (table.matrix.rows() != table.labels.size()) throw DataError("prediction table: row/label count mismatch");
    table.matrix.validate();
    const auto [fit, eval] = fuse_holdout_rows(table.labels, config.fuse_holdout, config.seed);
    if (fit.empty() || eval.empty()) throw DataError("prediction table has too few rows to hold out");

    std::vector<Label> fit_labels, eval_labels;
    std::vector<std::string> eval_ids;
    for (std::size_t r : fit) fit_labels.push_back(table.labels[r]);
    for (std::size_t r : eval) {
        eval_labels.push_back(table.labels[r]);
        eval_ids.push_back(table.ids.empty() ? std::to_string(r) : table.ids[r]);
    }
    const PredictionMatrix fit_x = table.matrix.select_rows(fit);
    const PredictionMatrix eval_x = table.matrix.select_rows(eval);

    RunReport report = report_header(config, "holdout", "row");
    if (!out_dir.empty()) fs::create_directories(out_dir);
    report.fusion = fit_fusion(fit_x, fit_labels, fit_x, fit_labels, config);
    for (const auto& w : report.fusion->weights.warnings) report.warnings.push_back("weights: " + w);
    if (!out_dir.empty()) write_fusion_files(out_dir, *report.fusion, report);

    const Units units = group_units(eval_ids, eval_labels, Aggregation::slice);
    report.evaluated_units = units.ids.size();
    add_model_rows(report, units, eval_x, column_names(table.matrix.cols()), report.fusion, out_dir);
    if (!out_dir.empty()) write_report(out_dir, report);
    return report;
}

RunReport evaluate_table(const PredictionTable& table, const std::optional<FusionModel>& fusion,
                         const RunConfig& config, const fs::path& out_dir)
{
    if (table.matrix.rows() != table.labels.size()) throw DataError("prediction table: row/label count mismatch");
    table.matrix.validate();
    if (fusion) {
        if (fusion->weights.alpha.size() != table.matrix.cols() || fusion->meta.learner.w.size() != table.matrix.cols())
            throw DataError("fusion parameters do not match the table's column count");
    }
    RunReport report = report_header(config, "table", "row");
    report.fusion = fusion;
    std::vector<std::string> ids = table.ids;
    if (ids.empty())
        for (std::size_t r = 0; r < table.labels.size(); ++r) ids.push_back(std::to_string(r));
    const Units units = group_units(ids, table.labels, Aggregation::slice);
    report.evaluated_units = units.ids.size();
    if (!out_dir.empty()) fs::create_directories(out_dir);
    add_model_rows(report, units, table.matrix, column_names(table.matrix.cols()), fusion, out_dir);
    if (!out_dir.empty()) write_report(out_dir, report);
    return report;
}

}  // namespace hde
