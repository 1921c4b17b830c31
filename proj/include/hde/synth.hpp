#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hde/types.hpp"

namespace hde {

/// Parameters of the synthetic blob dataset.
///
/// Every subject carries one Gaussian blob at a subject-specific location
/// (jittered by up to `jitter` pixels per slice). Positives use
/// intensity_by_class[1], negatives intensity_by_class[0]; radii are drawn per
/// subject from radius_range and act as the Gaussian sigma.
struct SynthSpec {
    int subjects_per_class = 20;
    int slices_per_subject = 20;
    int image_side = 32;
    std::array<double, 2> radius_range = {3.0, 4.0};
    std::array<double, 2> intensity_by_class = {0.4, 0.9};
    double background = 0.1;
    double noise_sigma = 0.15;
    double jitter = 1.0;
    std::uint64_t seed = 0;

    /// Throws ConfigError for nonpositive counts, an empty radius range, or
    /// intensities that would push the noiseless image outside [0, 1].
    void validate() const;
};

/// Ground-truth blob of one generated slice.
struct BlobTruth {
    std::string file;  // relative to the dataset root, e.g. "pos/p003_07.pgm"
    std::string subject_id;
    int slice_index = 0;
    Label label = Label::negative;
    double cx = 0.0;  // column
    double cy = 0.0;  // row
    double radius = 0.0;
    double intensity = 0.0;

    /// True when (row, col) lies in the box of half-width dilation * radius
    /// around the blob center.
    bool in_box(double row, double col, double dilation) const;
};

struct SynthDataset {
    std::vector<LabeledSample> samples;  // pixel values as written (8-bit quantized)
    std::vector<BlobTruth> truth;        // parallel to samples
};

/// Generates the dataset in memory, ordered negatives then positives, each by
/// subject then slice (the order load_image_dir returns).
SynthDataset make_synthetic(const SynthSpec& spec);

/// Writes `<dir>/{pos,neg}/<subject>_<slice>.pgm` and `<dir>/blobs.json`.
/// Throws DataError when the directory cannot be written.
SynthDataset synth_data(const SynthSpec& spec, const std::filesystem::path& dir);

std::vector<BlobTruth> load_blob_truth(const std::filesystem::path& sidecar);

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

}  // namespace hde
