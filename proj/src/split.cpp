#include "hde/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "hde/errors.hpp"
#include "hde/rng.hpp"

namespace hde {
namespace {

struct Subject {
    std::string id;
    Label label = Label::negative;
    std::vector<std::size_t> samples;
};

// Subjects in lexicographic id order, so grouping does not depend on sample order.
std::vector<Subject> group_subjects(std::span<const LabeledSample> samples,
                                    std::span<const std::size_t> subset)
{
    std::map<std::string, Subject> by_id;
    std::map<std::string, std::set<int>> seen_slices;
    for (std::size_t idx : subset) {
        if (idx >= samples.size()) throw std::out_of_range("sample index out of range");
        const LabeledSample& s = samples[idx];
        auto [it, inserted] = by_id.try_emplace(s.subject_id);
        Subject& subj = it->second;
        if (inserted) {
            subj.id = s.subject_id;
            subj.label = s.label;
        } else if (subj.label != s.label) {
            throw DataError("subject '" + s.subject_id + "' has slices with different labels");
        }
        if (!seen_slices[s.subject_id].insert(s.slice_index).second) {
            throw DataError("subject '" + s.subject_id + "' repeats slice index " +
                            std::to_string(s.slice_index));
        }
        subj.samples.push_back(idx);
    }
    std::vector<Subject> out;
    out.reserve(by_id.size());
    for (auto& [id, subj] : by_id) out.push_back(std::move(subj));
    return out;
}

// Largest-remainder apportionment of `total` units by `ratios`; ties go to the
// lower index.
std::vector<std::size_t> apportion(std::size_t total, std::span<const double> ratios)
{
    std::vector<std::size_t> counts(ratios.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < ratios.size(); ++p) {
        const double ideal = static_cast<double>(total) * ratios[p];
        counts[p] = static_cast<std::size_t>(std::floor(ideal + 1e-9));
        assigned += counts[p];
        remainders.emplace_back(ideal - static_cast<double>(counts[p]), p);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) {
        ++counts[remainders[r % remainders.size()].second];
    }
    return counts;
}

}  // namespace

std::vector<std::size_t> FoldAssignment::members(int f) const
{
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < indices.size(); ++j)
        if (fold_of[j] == f) out.push_back(indices[j]);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> FoldAssignment::complement(int f) const
{
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < indices.size(); ++j)
        if (fold_of[j] != f) out.push_back(indices[j]);
    std::sort(out.begin(), out.end());
    return out;
}

int FoldAssignment::fold_of_sample(std::size_t sample_index) const
{
    for (std::size_t j = 0; j < indices.size(); ++j)
        if (indices[j] == sample_index) return fold_of[j];
    throw std::out_of_range("sample " + std::to_string(sample_index) + " has no fold");
}

DatasetSplit split_dataset(std::span<const LabeledSample> samples,
                           const std::array<double, 3>& ratios, std::uint64_t seed)
{
    double sum = 0.0;
    for (double r : ratios) {
        if (!(r > 0.0)) throw ConfigError("split ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1, got " + std::to_string(sum));
    }

    std::vector<std::size_t> all(samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<Subject> subjects = group_subjects(samples, all);
    if (subjects.size() < ratios.size()) {
        throw DataError("need at least " + std::to_string(ratios.size()) +
                        " subjects to split into train/val/test, got " +
                        std::to_string(subjects.size()));
    }

    std::array<std::vector<std::size_t>, 2> by_class;  // subject positions per class
    for (std::size_t s = 0; s < subjects.size(); ++s)
        by_class[to_int(subjects[s].label)].push_back(s);
    if (by_class[0].empty() || by_class[1].empty()) {
        throw DataError("split requires at least one subject of each class");
    }

    Rng rng = make_rng(seed, "split");
    for (auto& members : by_class) shuffle(members, rng);

    // Partition totals first, then a class x partition table whose row sums are
    // the class sizes and column sums the totals.
    const std::vector<std::size_t> totals = apportion(subjects.size(), ratios);
    std::array<std::array<std::size_t, 3>, 2> table{};
    std::array<std::size_t, 2> row_deficit{};
    std::array<std::size_t, 3> col_deficit = {totals[0], totals[1], totals[2]};
    struct Cell {
        double frac;
        int c;
        int p;
    };
    std::vector<Cell> cells;
    for (int c = 0; c < 2; ++c) {
        const double n = static_cast<double>(by_class[c].size());
        std::size_t used = 0;
        for (int p = 0; p < 3; ++p) {
            const double ideal = n * ratios[p];
            const auto base = static_cast<std::size_t>(std::floor(ideal + 1e-9));
            table[c][p] = base;
            used += base;
            col_deficit[p] -= std::min(col_deficit[p], base);
            cells.push_back({ideal - static_cast<double>(base), c, p});
        }
        row_deficit[c] = by_class[c].size() - used;
    }
    std::stable_sort(cells.begin(), cells.end(),
                     [](const Cell& a, const Cell& b) { return a.frac > b.frac; });
    for (const Cell& cell : cells) {
        if (row_deficit[cell.c] > 0 && col_deficit[cell.p] > 0) {
            ++table[cell.c][cell.p];
            --row_deficit[cell.c];
            --col_deficit[cell.p];
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (int p = 0; p < 3 && row_deficit[c] > 0; ++p) {
            while (row_deficit[c] > 0 && col_deficit[p] > 0) {
                ++table[c][p];
                --row_deficit[c];
                --col_deficit[p];
            }
        }
    }

    DatasetSplit split;
    std::array<std::vector<std::size_t>*, 3> parts = {&split.train_ids, &split.val_ids,
                                                      &split.test_ids};
    for (int c = 0; c < 2; ++c) {
        std::size_t cursor = 0;
        for (int p = 0; p < 3; ++p) {
            for (std::size_t n = 0; n < table[c][p]; ++n, ++cursor) {
                const Subject& subj = subjects[by_class[c][cursor]];
                parts[p]->insert(parts[p]->end(), subj.samples.begin(), subj.samples.end());
            }
        }
    }
    for (auto* part : parts) std::sort(part->begin(), part->end());
    return split;
}

FoldAssignment assign_folds(std::span<const LabeledSample> samples,
                            std::span<const std::size_t> train_ids, int k, std::uint64_t seed)
{
    if (k < 2) throw ConfigError("fold count must be at least 2, got " + std::to_string(k));
    std::vector<Subject> subjects = group_subjects(samples, train_ids);
    if (static_cast<std::size_t>(k) > subjects.size()) {
        throw DataError("fold count " + std::to_string(k) + " exceeds subject count " +
                        std::to_string(subjects.size()));
    }

    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t s = 0; s < subjects.size(); ++s)
        by_class[to_int(subjects[s].label)].push_back(s);
    Rng rng = make_rng(seed, "folds");
    for (auto& members : by_class) shuffle(members, rng);

    // Deal negatives then positives round-robin: subject counts per fold differ
    // by at most one and each class is spread evenly.
    std::map<std::size_t, int> fold_by_sample;
    std::size_t position = 0;
    for (const auto& members : by_class) {
        for (std::size_t s : members) {
            const int f = static_cast<int>(position % static_cast<std::size_t>(k));
            for (std::size_t idx : subjects[s].samples) fold_by_sample[idx] = f;
            ++position;
        }
    }

    FoldAssignment out;
    out.k = k;
    for (const auto& [idx, f] : fold_by_sample) {
        out.indices.push_back(idx);
        out.fold_of.push_back(f);
    }
    return out;
}

}  // namespace hde
