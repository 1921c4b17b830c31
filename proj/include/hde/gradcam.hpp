#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hde/micronet.hpp"
#include "hde/tensor.hpp"
#include "hde/types.hpp"

namespace hde {

/// Nonnegative class activation map.
struct CamHeatmap {
    Image map;  // values >= 0, not normalized
    std::size_t source_layer = 0;
    int class_id = 1;
};

/// Per-channel spatial mean of a [C, H, W] (or [1, C, H, W]) gradient stack.
std::vector<double> channel_importance(const Tensor& grads);

/// ReLU(sum_k alpha_k A_k) over a [C, H, W] (or [1, C, H, W]) activation stack.
/// Throws std::invalid_argument when channel counts differ.
CamHeatmap compute_cam(const std::vector<double>& alpha, const Tensor& activations);

/// Grad-CAM at input resolution for one image.
///
/// The class score is the pre-sigmoid logit for class 1 and its negation for
/// class 0. Gradients of that score with respect to the net's feature maps
/// give the channel importances; the map is bilinearly upsampled to the input
/// height and width.
CamHeatmap explain(const MicroNet& net, const Image& image, int class_id);

/// Low-resolution variant of explain() without upsampling; also returns the
/// activations and gradients it used.
struct CamTrace {
    Tensor activations;  // [C, H, W]
    Tensor gradients;    // [C, H, W]
    std::vector<double> importance;
    CamHeatmap cam;
};
CamTrace explain_at_feature_resolution(const MicroNet& net, const Image& image, int class_id);

/// Min-max normalization to [0, 1]; a constant map becomes all zeros.
Image normalize_cam(const Image& cam);

/// Blue-to-red colormap at t in [0, 1].
std::array<double, 3> cam_color(double t);

/// Overlays the normalized cam on a grayscale image. Each pixel blends the
/// colormap over the gray value with weight 0.5 * t, so zero evidence leaves
/// the gray pixel untouched and full evidence is an even mix with pure red.
/// Throws std::invalid_argument when sizes differ.
RgbImage render_overlay(const CamHeatmap& cam, const Image& image);

/// Intensity-weighted centroid (row, col); empty when the map has no mass.
std::optional<std::pair<double, double>> cam_centroid(const Image& cam);

/// Writes `<stem>.ppm` overlay, `<stem>.pgm` normalized raw map and a
/// `<stem>.json` sidecar with class_id, source_layer and model id.
void export_explanation(const std::filesystem::path& dir, const std::string& stem,
                        const CamHeatmap& cam, const Image& image, const std::string& model_id);

}  // namespace hde
