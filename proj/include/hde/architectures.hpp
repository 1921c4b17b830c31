#pragma once

#include <string>

#include "hde/micronet.hpp"

namespace hde {

inline constexpr int kArchitectureVariants = 3;

/// Base-learner family. Variant `v` selects one of three small conv
/// backbones (cycling for v >= 3) topped by the same kind of head:
///   micro_a: conv8 relu pool conv16 relu pool
///   micro_b: conv6 relu pool conv12 relu conv12 relu pool
///   micro_c: conv12 relu pool conv12 relu pool
///   head:    global_avg_pool dense(32 | 24 | 16) relu dropout sigmoid_head
/// Parameters are zero; call MicroNet::initialize.
MicroNet make_architecture(int variant, int input_side, double dropout_rate);

std::string architecture_name(int variant);

}  // namespace hde
