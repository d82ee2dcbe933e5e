#pragma once

#include <vector>

#include "ctsev/infection.hpp"

namespace ctsev {

/// Severity classes: 1 mild, 2 moderate, 3 severe, 4 critical, from
/// parenchymal involvement bands <25%, 25-50%, 50-75%, >=75%.
constexpr int kNumClasses = 4;

/// Side weights of the weighted average method.
struct WamWeights {
    double right = 3.0;
    double left = 2.0;
};

/// Involvement band of a rate: 1 below 0.25, 2 in [0.25, 0.5), 3 in
/// [0.5, 0.75), 4 at or above 0.75.
int bin_score(double rate);

/// (w_right * bin(right) + w_left * bin(left)) / (w_right + w_left).
double slice_wam(double left_rate, double right_rate, const WamWeights& w = {});

struct WamResult {
    int severity = 1;
    double mean_score = 0.0;
};

/// Mean slice score over retained slices, rounded half-up and clamped to
/// [1, 4].
WamResult scan_wam(const std::vector<SliceResult>& results, const WamWeights& w = {});

} // namespace ctsev
