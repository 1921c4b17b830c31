#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hde/types.hpp"

namespace hde {

/// Base-learner probabilities with labels, as read from `id,p1,...,pK,label`.
struct PredictionTable {
    std::vector<std::string> ids;
    PredictionMatrix matrix;
    std::vector<Label> labels;
};

/// Parses a prediction CSV. Throws DataError naming the offending line for a
/// malformed header, ragged row, unparsable or out-of-range probability, or
/// non-binary label.
PredictionTable load_predictions_csv(const std::filesystem::path& path);

/// Parses prediction CSV text; `source` is used in error messages.
PredictionTable parse_predictions_csv(const std::string& text, const std::string& source);

void write_predictions_csv(const std::filesystem::path& path, const PredictionTable& table);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace hde
