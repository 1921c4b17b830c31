#include "hde/architectures.hpp"

#include <stdexcept>
#include <vector>

namespace hde {

std::string architecture_name(int variant)
{
    static const char* names[kArchitectureVariants] = {"micro_a", "micro_b", "micro_c"};
    const int v = ((variant % kArchitectureVariants) + kArchitectureVariants) % kArchitectureVariants;
    std::string name = names[v];
    if (variant >= kArchitectureVariants) name += "_" + std::to_string(variant);
    return name;
}

MicroNet make_architecture(int variant, int input_side, double dropout_rate)
{
    if (variant < 0) throw std::invalid_argument("architecture variant must be nonnegative");
    std::vector<LayerSpec> specs;
    int side = input_side;
    auto conv = [&](int channels) {
        specs.push_back(LayerSpec::conv(channels, 3));
        specs.push_back(LayerSpec::relu());
        side -= 2;
    };
    auto pool = [&] {
        specs.push_back(LayerSpec::maxpool());
        side /= 2;
    };
    int hidden = 0;
    switch (variant % kArchitectureVariants) {
    case 0:
        conv(8), pool(), conv(16), pool();
        hidden = 32;
        break;
    case 1:
        conv(6), pool(), conv(12), conv(12), pool();
        hidden = 24;
        break;
    default:
        conv(12), pool(), conv(12), pool();
        hidden = 16;
        break;
    }
    if (side < 1) {
        throw std::invalid_argument("input side " + std::to_string(input_side) + " too small for " +
                                    architecture_name(variant));
    }
    const std::size_t head_start = specs.size();
    specs.push_back(LayerSpec::global_avg_pool());
    specs.push_back(LayerSpec::dense(hidden));
    specs.push_back(LayerSpec::relu());
    specs.push_back(LayerSpec::dropout(dropout_rate));
    specs.push_back(LayerSpec::head());
    return MicroNet(architecture_name(variant), {1, input_side, input_side}, std::move(specs), head_start);
}

}  // namespace hde
