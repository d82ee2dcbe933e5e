#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ctsev/infection.hpp"

namespace ctsev {

/// 40 consecutive (left rate, right rate) pairs.
using FeatureVector = std::array<double, 80>;

constexpr int kFeatureDim = 80;
constexpr int kFeaturePairs = 40;

/// Builds the fixed-size vector from the retained slices, in slice order.
/// With more than 40 retained slices each of 40 contiguous index regions
/// contributes its lower-median slice; with at most 40 the real pairs come
/// first and the remaining slots repeat the average pair.
FeatureVector build_feature_vector(const std::vector<SliceResult>& results);

/// The regions' sampled positions for M > 40 retained slices: region r spans
/// [floor(r*M/40), floor((r+1)*M/40)) and contributes index
/// lo + floor((len-1)/2). Exposed for verification.
std::array<int, kFeaturePairs> region_sample_indices(int m);

/// One row of the feature CSV contract.
struct FeatureRow {
    std::string patient_id;
    FeatureVector values{};
    std::optional<int> label;
};

/// Header: patient_id,f0..f79[,label]. Either every row carries a label or
/// none does.
void write_feature_csv(const std::filesystem::path& path, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_feature_csv(const std::filesystem::path& path);

} // namespace ctsev
