#include "hde/types.hpp"

#include <cmath>
#include <string>

#include "hde/errors.hpp"

namespace hde {

Label label_from_int(long value)
{
    if (value == 0) return Label::negative;
    if (value == 1) return Label::positive;
    throw DataError("label must be 0 or 1, got " + std::to_string(value));
}

Image::Image(int h, int w, double fill)
    : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill)
{
    if (h < 0 || w < 0) throw std::invalid_argument("image dimensions must be nonnegative");
}

PredictionMatrix::PredictionMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
{
}

std::vector<double> PredictionMatrix::column(std::size_t k) const
{
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, k);
    return out;
}

PredictionMatrix PredictionMatrix::select_rows(std::span<const std::size_t> indices) const
{
    PredictionMatrix out(indices.size(), cols_);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= rows_) throw std::out_of_range("prediction row index out of range");
        const auto src = row(indices[r]);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

void PredictionMatrix::validate() const
{
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double p = (*this)(i, k);
            if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
                throw DataError("probability out of [0,1] at row " + std::to_string(i) +
                                ", column " + std::to_string(k + 1));
            }
        }
    }
}

}  // namespace hde
