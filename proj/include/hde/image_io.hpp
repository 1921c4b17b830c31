#pragma once

#include <filesystem>
#include <vector>

#include "hde/types.hpp"

namespace hde {

/// Bilinear resampling with aligned corners: output corners sample input
/// corners exactly, constants are preserved, and no output value leaves the
/// input's [min, max]. Used both for ingestion and for Grad-CAM upsampling.
Image resize_bilinear(const Image& src, int out_height, int out_width);

/// Reads binary PGM (P5), 8- or 16-bit. Intensities are divided by maxval.
Image read_pgm(const std::filesystem::path& path);
/// Writes 8-bit binary PGM; intensities are clamped to [0, 1] and rounded.
void write_pgm(const std::filesystem::path& path, const Image& image);
/// Writes binary PPM (P6).
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

/// Reads a PNG and converts it to 8-bit grayscale.
Image read_png(const std::filesystem::path& path);
/// Writes an 8-bit grayscale PNG.
void write_png(const std::filesystem::path& path, const Image& image);

/// Dispatches on extension (.pgm or .png).
Image read_image(const std::filesystem::path& path);

/// Loads `<root>/<pos|neg>/<subject>_<slice>.{pgm,png}`.
///
/// Labels come from the subdirectory (`pos` = 1, `neg` = 0); images are
/// resized to `input_side` x `input_side`. Regular files directly under
/// `root` (e.g. generator sidecars) are ignored. Samples are ordered by label
/// directory, then file name. Throws DataError naming the offending path.
std::vector<LabeledSample> load_image_dir(const std::filesystem::path& root, int input_side);

}  // namespace hde
