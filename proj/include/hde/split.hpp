#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hde/types.hpp"

namespace hde {

/// Disjoint train/validation/test index lists over a sample vector.
struct DatasetSplit {
    std::vector<std::size_t> train_ids;
    std::vector<std::size_t> val_ids;
    std::vector<std::size_t> test_ids;
};

/// Fold membership for a list of training-sample indices.
/// `fold_of[j]` is the fold of sample `indices[j]`.
struct FoldAssignment {
    int k = 0;
    std::vector<std::size_t> indices;
    std::vector<int> fold_of;

    /// Sample indices in fold `f`, ascending.
    std::vector<std::size_t> members(int f) const;
    /// Sample indices outside fold `f`, ascending.
    std::vector<std::size_t> complement(int f) const;
    int fold_of_sample(std::size_t sample_index) const;
};

/// Subject-grouped, label-stratified three-way split.
///
/// Subjects (not slices) are the unit of assignment. Each class's subjects are
/// shuffled and apportioned so that partition totals follow `ratios` by largest
/// remainder and every class is spread across partitions in proportion.
/// Throws ConfigError for bad ratios and DataError for too few subjects, a
/// missing class, or a subject whose slices disagree on the label.
DatasetSplit split_dataset(std::span<const LabeledSample> samples,
                           const std::array<double, 3>& ratios, std::uint64_t seed);

/// Subject-grouped, label-stratified k-fold assignment of `train_ids`.
/// Fold subject counts differ by at most one.
FoldAssignment assign_folds(std::span<const LabeledSample> samples,
                            std::span<const std::size_t> train_ids, int k, std::uint64_t seed);

}  // namespace hde
