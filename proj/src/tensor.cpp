#include "hde/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace hde {

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape))
{
    std::size_t n = 1;
    for (int d : shape_) {
        if (d < 0) throw std::invalid_argument("negative tensor dimension");
        n *= static_cast<std::size_t>(d);
    }
    data_.assign(n, fill);
}

void Tensor::fill(double v)
{
    std::fill(data_.begin(), data_.end(), v);
}

std::string Tensor::shape_string() const
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

}  // namespace hde
