#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hde {

/// Binary class label; `positive` is the class of interest (e.g. AD in AD vs MCI).
enum class Label : std::uint8_t { negative = 0, positive = 1 };

/// Validates an integer label; throws DataError for anything other than 0 or 1.
Label label_from_int(long value);

constexpr int to_int(Label y) { return y == Label::positive ? 1 : 0; }
constexpr double to_target(Label y) { return y == Label::positive ? 1.0 : 0.0; }

/// Grayscale image, row-major, intensities in [0, 1].
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int h, int w, double fill = 0.0);

    double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const
    {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
    bool empty() const { return pixels.empty(); }
};

/// 8-bit RGB raster, row-major interleaved.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> rgb;

    RgbImage() = default;
    RgbImage(int h, int w) : height(h), width(w), rgb(static_cast<std::size_t>(h) * w * 3, 0) {}

    std::uint8_t* pixel(int row, int col)
    {
        return rgb.data() + (static_cast<std::size_t>(row) * width + col) * 3;
    }
    const std::uint8_t* pixel(int row, int col) const
    {
        return rgb.data() + (static_cast<std::size_t>(row) * width + col) * 3;
    }
};

/// One slice image or one precomputed row of base-learner probabilities.
struct LabeledSample {
    std::string subject_id;
    int slice_index = 0;
    std::variant<Image, std::vector<double>> payload;
    Label label = Label::negative;

    const Image& image() const { return std::get<Image>(payload); }
};

/// N x K matrix of base-learner probabilities, row-major; entries in [0, 1].
class PredictionMatrix {
public:
    PredictionMatrix() = default;
    PredictionMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    double& operator()(std::size_t i, std::size_t k) { return data_[i * cols_ + k]; }
    double operator()(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }

    std::vector<double> column(std::size_t k) const;
    /// Rows selected by `indices`, in that order.
    PredictionMatrix select_rows(std::span<const std::size_t> indices) const;
    /// Throws DataError if any entry lies outside [0, 1] or is not finite.
    void validate() const;

    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace hde
