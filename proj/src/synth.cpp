#include "hde/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hde/errors.hpp"
#include "hde/image_io.hpp"
#include "hde/rng.hpp"

namespace hde {
namespace {

std::string padded(int v, int width)
{
    std::string s = std::to_string(v);
    if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
    return s;
}

int digits_for(int n)
{
    int d = 1;
    for (int v = std::max(n - 1, 0); v >= 10; v /= 10) ++d;
    return std::max(d, 2);
}

double quantize(double v)
{
    return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

}  // namespace

void SynthSpec::validate() const
{
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError("synthetic spec: " + msg);
    };
    require(subjects_per_class > 0, "subjects_per_class must be positive");
    require(slices_per_subject > 0, "slices_per_subject must be positive");
    require(image_side >= 8, "image_side must be at least 8");
    require(radius_range[0] > 0.0 && radius_range[0] <= radius_range[1], "bad radius_range");
    require(2.0 * radius_range[1] < 0.5 * image_side, "blob too large for image_side");
    require(background >= 0.0 && background <= 1.0, "background must lie in [0,1]");
    for (double v : intensity_by_class)
        require(v >= 0.0 && background + v <= 1.0, "background + intensity must lie in [0,1]");
    require(noise_sigma >= 0.0, "noise_sigma must be nonnegative");
    require(jitter >= 0.0, "jitter must be nonnegative");
}

bool BlobTruth::in_box(double row, double col, double dilation) const
{
    const double half = dilation * radius;
    return std::abs(row - cy) <= half && std::abs(col - cx) <= half;
}

SynthDataset make_synthetic(const SynthSpec& spec)
{
    spec.validate();
    SynthDataset out;
    const int side = spec.image_side;
    const double margin = 2.0 * spec.radius_range[1];
    const int subj_digits = digits_for(spec.subjects_per_class);
    const int slice_digits = digits_for(spec.slices_per_subject);

    for (int cls = 0; cls < 2; ++cls) {
        const Label label = cls == 1 ? Label::positive : Label::negative;
        const std::string dir = cls == 1 ? "pos" : "neg";
        for (int s = 0; s < spec.subjects_per_class; ++s) {
            Rng rng = make_rng(spec.seed, "synth", static_cast<std::uint64_t>(cls), static_cast<std::uint64_t>(s));
            const std::string subject = (cls == 1 ? "p" : "n") + padded(s, subj_digits);
            const double span = side - 1 - 2.0 * margin;
            const double base_x = margin + uniform01(rng) * span;
            const double base_y = margin + uniform01(rng) * span;
            const double radius =
                spec.radius_range[0] + uniform01(rng) * (spec.radius_range[1] - spec.radius_range[0]);
            const double amp = spec.intensity_by_class[static_cast<std::size_t>(cls)];

            for (int k = 0; k < spec.slices_per_subject; ++k) {
                BlobTruth t;
                t.subject_id = subject;
                t.slice_index = k;
                t.label = label;
                t.cx = base_x + (2.0 * uniform01(rng) - 1.0) * spec.jitter;
                t.cy = base_y + (2.0 * uniform01(rng) - 1.0) * spec.jitter;
                t.radius = radius;
                t.intensity = amp;
                t.file = dir + "/" + subject + "_" + padded(k, slice_digits) + ".pgm";

                Image img(side, side);
                const double inv = 1.0 / (2.0 * radius * radius);
                for (int r = 0; r < side; ++r) {
                    for (int c = 0; c < side; ++c) {
                        const double d2 = (r - t.cy) * (r - t.cy) + (c - t.cx) * (c - t.cx);
                        double v = spec.background + amp * std::exp(-d2 * inv);
                        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * standard_normal(rng);
                        img.at(r, c) = quantize(v);
                    }
                }
                LabeledSample sample;
                sample.subject_id = subject;
                sample.slice_index = k;
                sample.label = label;
                sample.payload = std::move(img);
                out.samples.push_back(std::move(sample));
                out.truth.push_back(std::move(t));
            }
        }
    }
    return out;
}

SynthDataset synth_data(const SynthSpec& spec, const std::filesystem::path& dir)
{
    SynthDataset data = make_synthetic(spec);
    std::error_code ec;
    for (const char* sub : {"neg", "pos"}) {
        std::filesystem::create_directories(dir / sub, ec);
        if (ec) throw DataError((dir / sub).string() + ": cannot create directory: " + ec.message());
    }
    for (std::size_t i = 0; i < data.samples.size(); ++i) write_pgm(dir / data.truth[i].file, data.samples[i].image());

    nlohmann::json blobs = nlohmann::json::array();
    for (const BlobTruth& t : data.truth) {
        blobs.push_back({{"file", t.file},
                         {"subject", t.subject_id},
                         {"slice", t.slice_index},
                         {"label", to_int(t.label)},
                         {"cx", t.cx},
                         {"cy", t.cy},
                         {"radius", t.radius},
                         {"intensity", t.intensity}});
    }
    const nlohmann::json sidecar{{"spec", to_json(spec)}, {"blobs", std::move(blobs)}};
    std::ofstream out(dir / "blobs.json");
    if (!out) throw DataError((dir / "blobs.json").string() + ": cannot open for writing");
    out << sidecar.dump(1) << '\n';
    if (!out) throw DataError((dir / "blobs.json").string() + ": write failed");
    return data;
}

std::vector<BlobTruth> load_blob_truth(const std::filesystem::path& sidecar)
{
    std::ifstream in(sidecar);
    if (!in) throw DataError(sidecar.string() + ": cannot open");
    try {
        nlohmann::json j;
        in >> j;
        std::vector<BlobTruth> out;
        for (const auto& b : j.at("blobs")) {
            BlobTruth t;
            t.file = b.at("file").get<std::string>();
            t.subject_id = b.at("subject").get<std::string>();
            t.slice_index = b.at("slice").get<int>();
            t.label = label_from_int(b.at("label").get<long>());
            t.cx = b.at("cx").get<double>();
            t.cy = b.at("cy").get<double>();
            t.radius = b.at("radius").get<double>();
            t.intensity = b.at("intensity").get<double>();
            out.push_back(std::move(t));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(sidecar.string() + ": " + e.what());
    }
}

nlohmann::json to_json(const SynthSpec& spec)
{
    return {{"subjects_per_class", spec.subjects_per_class},
            {"slices_per_subject", spec.slices_per_subject},
            {"image_side", spec.image_side},
            {"radius_range", spec.radius_range},
            {"intensity_by_class", spec.intensity_by_class},
            {"background", spec.background},
            {"noise_sigma", spec.noise_sigma},
            {"jitter", spec.jitter},
            {"seed", spec.seed}};
}

SynthSpec synth_spec_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
    SynthSpec s;
    const nlohmann::json known = to_json(s);
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError("unknown synthetic spec key '" + key + "'");
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        get("subjects_per_class", s.subjects_per_class);
        get("slices_per_subject", s.slices_per_subject);
        get("image_side", s.image_side);
        get("radius_range", s.radius_range);
        get("intensity_by_class", s.intensity_by_class);
        get("background", s.background);
        get("noise_sigma", s.noise_sigma);
        get("jitter", s.jitter);
        get("seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad synthetic spec value: ") + e.what());
    }
    s.validate();
    return s;
}

}  // namespace hde
