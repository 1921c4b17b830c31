#pragma once

#include <filesystem>
#include <string>

#include "hde/micronet.hpp"

namespace hde {

// Checkpoint file layout: one line of JSON (architecture id, input shape,
// head start, per-layer spec, shapes and trainable flag, parameter count)
// terminated by '\n', followed by every layer's weight then bias as
// little-endian IEEE-754 binary64 values in layer order.

void save_checkpoint(const std::filesystem::path& path, const MicroNet& net);

/// Rebuilds the network from the header and reads parameters bit-exactly.
/// Adam state is not stored and starts from zero. Throws DataError on a
/// malformed or truncated file.
MicroNet load_checkpoint(const std::filesystem::path& path);

}  // namespace hde
