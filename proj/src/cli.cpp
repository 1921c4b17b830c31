#include "hde/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "hde/checkpoint.hpp"
#include "hde/config.hpp"
#include "hde/errors.hpp"
#include "hde/gradcam.hpp"
#include "hde/image_io.hpp"
#include "hde/pipeline.hpp"
#include "hde/synth.hpp"

namespace hde::cli {
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--config", c.config_path, "JSON configuration file");
    sub->add_option("--seed", c.seed, "overrides the configured seed");
}

RunConfig resolve_config(const Common& c)
{
    RunConfig config;
    if (!c.config_path.empty()) config = load_config(c.config_path);
    if (c.seed) config.seed = *c.seed;
    config.validate();
    return config;
}

nlohmann::json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open");
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hybrid deep ensemble: base CNNs, weighted and stacked fusion, Grad-CAM"};
    app.require_subcommand(1);

    Common synth_c, train_c, run_c, fuse_c, eval_c, explain_c;

    auto* synth = app.add_subcommand("synth-data", "generate the synthetic blob dataset");
    add_common(synth, synth_c);
    std::string synth_out;
    std::optional<int> subjects, slices, side;
    std::optional<double> noise;
    synth->add_option("--out", synth_out, "dataset directory")->required();
    synth->add_option("--subjects", subjects, "subjects per class");
    synth->add_option("--slices", slices, "slices per subject");
    synth->add_option("--side", side, "image side in pixels");
    synth->add_option("--noise", noise, "Gaussian noise sigma");

    auto* train = app.add_subcommand("train-base", "split, train base learners, write checkpoints and OOF table");
    add_common(train, train_c);
    std::string train_data, train_out;
    train->add_option("--data", train_data, "image directory")->required();
    train->add_option("--out", train_out, "output directory")->required();

    auto* run = app.add_subcommand("run", "full pipeline");
    add_common(run, run_c);
    std::string run_data, run_out;
    bool roc_from_folds = false;
    std::optional<int> threads;
    run->add_option("--data", run_data, "image directory")->required();
    run->add_option("--out", run_out, "output directory")->required();
    run->add_flag("--roc-from-folds", roc_from_folds, "ROC curves from pooled out-of-fold scores");
    run->add_option("--threads", threads, "worker threads for model training");

    auto* fuse = app.add_subcommand("fuse", "fit and evaluate fusion on a prediction CSV");
    add_common(fuse, fuse_c);
    std::string fuse_pred, fuse_out;
    fuse->add_option("--predictions", fuse_pred, "CSV with id,p1..pK,label")->required();
    fuse->add_option("--out", fuse_out, "output directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "metrics and ROC files for a prediction CSV");
    add_common(evaluate, eval_c);
    std::string eval_pred, eval_out, eval_weights, eval_meta;
    evaluate->add_option("--predictions", eval_pred, "CSV with id,p1..pK,label")->required();
    evaluate->add_option("--out", eval_out, "output directory")->required();
    evaluate->add_option("--weights", eval_weights, "weights.json from a previous fit");
    evaluate->add_option("--meta", eval_meta, "meta.json from a previous fit");

    auto* explain_cmd = app.add_subcommand("explain", "Grad-CAM heatmap for one image");
    add_common(explain_cmd, explain_c);
    std::string ckpt, image_path, explain_out, stem = "explanation";
    int class_id = 1;
    explain_cmd->add_option("--checkpoint", ckpt, "model checkpoint")->required();
    explain_cmd->add_option("--image", image_path, "PGM or PNG image")->required();
    explain_cmd->add_option("--class", class_id, "target class (0 or 1)")->check(CLI::Range(0, 1));
    explain_cmd->add_option("--out", explain_out, "output directory")->required();
    explain_cmd->add_option("--stem", stem, "output file stem");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth) {
            SynthSpec spec;
            if (!synth_c.config_path.empty()) spec = synth_spec_from_json(read_json(synth_c.config_path));
            if (synth_c.seed) spec.seed = *synth_c.seed;
            if (subjects) spec.subjects_per_class = *subjects;
            if (slices) spec.slices_per_subject = *slices;
            if (side) spec.image_side = *side;
            if (noise) spec.noise_sigma = *noise;
            const SynthDataset data = synth_data(spec, synth_out);
            out << "wrote " << data.samples.size() << " images to " << synth_out << "\n";
        } else if (*train) {
            const RunConfig config = resolve_config(train_c);
            const BaseStage st = run_base_stage(config, train_data, train_out);
            out << "trained " << st.learners.size() << " base learners on " << st.split.train_ids.size()
                << " slices; artifacts in " << train_out << "\n";
        } else if (*run) {
            RunConfig config = resolve_config(run_c);
            if (roc_from_folds) config.roc_from_folds = true;
            if (threads) config.threads = *threads;
            config.validate();
            const RunReport report = run_pipeline(config, run_data, run_out);
            out << render_table(report);
        } else if (*fuse) {
            const RunConfig config = resolve_config(fuse_c);
            const RunReport report = fuse_only(load_predictions_csv(fuse_pred), config, fuse_out);
            out << render_table(report);
        } else if (*evaluate) {
            const RunConfig config = resolve_config(eval_c);
            std::optional<FusionModel> fusion;
            if (eval_weights.empty() != eval_meta.empty())
                throw ConfigError("--weights and --meta must be given together");
            if (!eval_weights.empty()) {
                FusionModel m;
                try {
                    m.weights.alpha = WeightVector(read_json(eval_weights).at("alpha").get<std::vector<double>>());
                    m.meta.learner = meta_from_json(read_json(eval_meta));
                } catch (const nlohmann::json::exception& e) {
                    throw DataError(std::string("bad fusion file: ") + e.what());
                } catch (const std::invalid_argument& e) {
                    throw DataError(std::string("bad fusion file: ") + e.what());
                }
                m.rule = config.fusion_combine_rule;
                fusion = std::move(m);
            }
            const RunReport report = evaluate_table(load_predictions_csv(eval_pred), fusion, config, eval_out);
            out << render_table(report);
        } else if (*explain_cmd) {
            resolve_config(explain_c);
            const MicroNet net = load_checkpoint(ckpt);
            const Image raw = read_image(image_path);
            const int s = net.input_shape()[1];
            const Image image = raw.height == s && raw.width == s ? raw : resize_bilinear(raw, s, s);
            const CamHeatmap cam = explain(net, image, class_id);
            export_explanation(explain_out, stem, cam, image, net.architecture_id());
            out << "wrote " << (fs::path(explain_out) / stem).string() << ".{ppm,pgm,json}\n";
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace hde::cli
