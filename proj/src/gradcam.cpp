#include "hde/gradcam.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "hde/errors.hpp"
#include "hde/image_io.hpp"

namespace hde {
namespace {

// Accepts [C,H,W] or [1,C,H,W]; returns {C,H,W}.
std::array<int, 3> stack_shape(const Tensor& t, const char* what)
{
    if (t.rank() == 3) return {t.dim(0), t.dim(1), t.dim(2)};
    if (t.rank() == 4 && t.dim(0) == 1) return {t.dim(1), t.dim(2), t.dim(3)};
    throw std::invalid_argument(std::string(what) + ": expected [C,H,W] stack, got " + t.shape_string());
}

Tensor single_item(const Tensor& batch)
{
    Tensor out({batch.dim(1), batch.dim(2), batch.dim(3)});
    std::copy(batch.data(), batch.data() + out.size(), out.data());
    return out;
}

}  // namespace

std::vector<double> channel_importance(const Tensor& grads)
{
    const auto [c, h, w] = stack_shape(grads, "channel_importance");
    if (c == 0 || h == 0 || w == 0) throw std::invalid_argument("channel_importance: empty gradient stack");
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::vector<double> alpha(static_cast<std::size_t>(c));
    for (int k = 0; k < c; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < plane; ++i) s += grads[k * plane + i];
        alpha[k] = s / static_cast<double>(plane);
    }
    return alpha;
}

CamHeatmap compute_cam(const std::vector<double>& alpha, const Tensor& activations)
{
    const auto [c, h, w] = stack_shape(activations, "compute_cam");
    if (alpha.size() != static_cast<std::size_t>(c)) {
        throw std::invalid_argument("compute_cam: " + std::to_string(alpha.size()) +
                                    " importances for " + std::to_string(c) + " channels");
    }
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    CamHeatmap cam;
    cam.map = Image(h, w);
    for (std::size_t i = 0; i < plane; ++i) {
        double s = 0.0;
        for (int k = 0; k < c; ++k) s += alpha[k] * activations[k * plane + i];
        cam.map.pixels[i] = s > 0.0 ? s : 0.0;
    }
    return cam;
}

CamTrace explain_at_feature_resolution(const MicroNet& net, const Image& image, int class_id)
{
    if (class_id != 0 && class_id != 1) throw std::invalid_argument("class_id must be 0 or 1");
    const Shape3& in = net.input_shape();
    if (in[0] != 1 || image.height != in[1] || image.width != in[2]) {
        throw std::invalid_argument("explain: image is " + std::to_string(image.height) + "x" +
                                    std::to_string(image.width) + ", network expects " +
                                    std::to_string(in[1]) + "x" + std::to_string(in[2]));
    }
    Tensor batch({1, 1, image.height, image.width});
    std::copy(image.pixels.begin(), image.pixels.end(), batch.data());
    const ForwardCache cache = forward(net, batch, false);
    const double upstream = class_id == 1 ? 1.0 : -1.0;
    const GradientSet grads = backward_from_logits(net, cache, std::span<const double>(&upstream, 1));

    CamTrace trace;
    trace.activations = single_item(cache.feature_maps());
    trace.gradients = single_item(grads.feature_grad);
    trace.importance = channel_importance(trace.gradients);
    trace.cam = compute_cam(trace.importance, trace.activations);
    trace.cam.source_layer = net.feature_layer();
    trace.cam.class_id = class_id;
    return trace;
}

CamHeatmap explain(const MicroNet& net, const Image& image, int class_id)
{
    CamTrace trace = explain_at_feature_resolution(net, image, class_id);
    CamHeatmap cam = std::move(trace.cam);
    cam.map = resize_bilinear(cam.map, image.height, image.width);
    return cam;
}

Image normalize_cam(const Image& cam)
{
    Image out(cam.height, cam.width);
    if (cam.pixels.empty()) return out;
    const auto [lo, hi] = std::minmax_element(cam.pixels.begin(), cam.pixels.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < cam.pixels.size(); ++i) out.pixels[i] = (cam.pixels[i] - *lo) / range;
    return out;
}

std::array<double, 3> cam_color(double t)
{
    t = std::clamp(t, 0.0, 1.0);
    // blue -> cyan -> yellow -> red
    if (t < 1.0 / 3.0) {
        const double u = 3.0 * t;
        return {0.0, u, 1.0};
    }
    if (t < 2.0 / 3.0) {
        const double u = 3.0 * t - 1.0;
        return {u, 1.0, 1.0 - u};
    }
    const double u = 3.0 * t - 2.0;
    return {1.0, 1.0 - u, 0.0};
}

RgbImage render_overlay(const CamHeatmap& cam, const Image& image)
{
    if (cam.map.height != image.height || cam.map.width != image.width) {
        throw std::invalid_argument("render_overlay: heatmap and image sizes differ");
    }
    const Image norm = normalize_cam(cam.map);
    RgbImage out(image.height, image.width);
    for (int r = 0; r < image.height; ++r) {
        for (int c = 0; c < image.width; ++c) {
            const double gray = std::clamp(image.at(r, c), 0.0, 1.0);
            const double t = norm.at(r, c);
            const double a = 0.5 * t;
            const auto color = cam_color(t);
            std::uint8_t* px = out.pixel(r, c);
            for (int ch = 0; ch < 3; ++ch) {
                const double v = (1.0 - a) * gray + a * color[ch];
                px[ch] = static_cast<std::uint8_t>(std::lround(255.0 * v));
            }
        }
    }
    return out;
}

std::optional<std::pair<double, double>> cam_centroid(const Image& cam)
{
    double mass = 0.0;
    double sr = 0.0;
    double sc = 0.0;
    for (int r = 0; r < cam.height; ++r) {
        for (int c = 0; c < cam.width; ++c) {
            const double v = cam.at(r, c);
            mass += v;
            sr += v * r;
            sc += v * c;
        }
    }
    if (!(mass > 0.0)) return std::nullopt;
    return std::make_pair(sr / mass, sc / mass);
}

void export_explanation(const std::filesystem::path& dir, const std::string& stem,
                        const CamHeatmap& cam, const Image& image, const std::string& model_id)
{
    std::filesystem::create_directories(dir);
    write_ppm(dir / (stem + ".ppm"), render_overlay(cam, image));
    write_pgm(dir / (stem + ".pgm"), normalize_cam(cam.map));
    const nlohmann::json sidecar{{"class_id", cam.class_id},
                                 {"source_layer", cam.source_layer},
                                 {"model_id", model_id},
                                 {"height", cam.map.height},
                                 {"width", cam.map.width}};
    std::ofstream out(dir / (stem + ".json"));
    if (!out) throw DataError((dir / (stem + ".json")).string() + ": cannot open for writing");
    out << sidecar.dump(2) << '\n';
}

}  // namespace hde
