#include "ctsev/wam.hpp"

#include <algorithm>
#include <cmath>

#include "ctsev/errors.hpp"

namespace ctsev {

int bin_score(double rate) {
    if (!(rate >= 0.0 && rate <= 1.0))
        throw DataError("bin_score: rate outside [0, 1]");
    if (rate < 0.25) return 1;
    if (rate < 0.50) return 2;
    if (rate < 0.75) return 3;
    return 4;
}

double slice_wam(double left_rate, double right_rate, const WamWeights& w) {
    if (!(w.right > 0.0 && w.left > 0.0))
        throw DataError("slice_wam: weights must be positive");
    return (w.right * bin_score(right_rate) + w.left * bin_score(left_rate)) /
           (w.right + w.left);
}

WamResult scan_wam(const std::vector<SliceResult>& results, const WamWeights& w) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : results) {
        if (!r.retained) continue;
        sum += slice_wam(r.left_rate, r.right_rate, w);
        ++n;
    }
    if (n == 0) throw DataError("scan_wam: no retained slices");
    WamResult out;
    out.mean_score = sum / n;
    out.severity = std::clamp(static_cast<int>(std::floor(out.mean_score + 0.5)), 1, kNumClasses);
    return out;
}

} // namespace ctsev
