#pragma once

// Reference implementations used only as test oracles. Each one is written
// independently of the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hde/types.hpp"

namespace oracle {

/// AUC as the fraction of (positive, negative) pairs ranked correctly, ties 1/2.
inline double mann_whitney_auc(const std::vector<hde::Label>& labels, const std::vector<double>& scores)
{
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != hde::Label::positive) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != hde::Label::negative) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

/// Mean clamped BCE of a1 * p1 + (1 - a1) * p2.
inline double bce_two(double a1, const std::vector<double>& p1, const std::vector<double>& p2,
                      const std::vector<int>& y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double p = a1 * p1[i] + (1.0 - a1) * p2[i];
        p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
        s += y[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    return s / static_cast<double>(y.size());
}

/// Minimum of bce_two over a1 in {0, step, 2 step, ..., 1}.
inline double grid_min_bce(const std::vector<double>& p1, const std::vector<double>& p2,
                           const std::vector<int>& y, double step = 1e-3)
{
    const auto n = static_cast<int>(std::lround(1.0 / step));
    double best = INFINITY;
    for (int i = 0; i <= n; ++i) best = std::min(best, bce_two(i * step, p1, p2, y));
    return best;
}

/// Central difference of f along coordinate `k` of x.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t k, double h)
{
    const double x0 = x[k];
    x[k] = x0 + h;
    const double up = f(x);
    x[k] = x0 - h;
    const double down = f(x);
    return (up - down) / (2.0 * h);
}

inline double relative_error(double a, double b, double floor = 1e-8)
{
    return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), floor);
}

/// Valid 2-D correlation of one channel with one kernel, via explicit patches.
inline std::vector<double> correlate_valid(const std::vector<double>& img, int h, int w,
                                           const std::vector<double>& ker, int k)
{
    std::vector<double> out;
    for (int r = 0; r + k <= h; ++r)
        for (int c = 0; c + k <= w; ++c) {
            std::vector<double> patch;
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) patch.push_back(img[(r + i) * w + c + j]);
            double s = 0.0;
            for (std::size_t q = 0; q < patch.size(); ++q) s += patch[q] * ker[q];
            out.push_back(s);
        }
    return out;
}

/// Aligned-corner bilinear resampling maps a linear ramp a*r + b*c + d to the
/// ramp evaluated at the rescaled coordinates.
inline double ramp_after_resize(double a, double b, double d, int row, int col, int in_h, int in_w,
                                int out_h, int out_w)
{
    const double sr = out_h > 1 ? static_cast<double>(in_h - 1) / (out_h - 1) : 0.0;
    const double sc = out_w > 1 ? static_cast<double>(in_w - 1) / (out_w - 1) : 0.0;
    return a * row * sr + b * col * sc + d;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("hde_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::FILE* f = std::fopen(p.string().c_str(), "rb");
    if (!f) return {};
    std::string s;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) s.append(buf, n);
    std::fclose(f);
    return s;
}

}  // namespace oracle
