#include "ctsev/features.hpp"

#include <string>

#include "ctsev/csv.hpp"
#include "ctsev/errors.hpp"

namespace ctsev {

std::array<int, kFeaturePairs> region_sample_indices(int m) {
    if (m <= kFeaturePairs)
        throw InternalError("region_sample_indices: needs more than 40 slices");
    std::array<int, kFeaturePairs> out{};
    for (int r = 0; r < kFeaturePairs; ++r) {
        const int lo = static_cast<int>(static_cast<std::int64_t>(r) * m / kFeaturePairs);
        const int hi = static_cast<int>(static_cast<std::int64_t>(r + 1) * m / kFeaturePairs);
        out[r] = lo + (hi - lo - 1) / 2;
    }
    return out;
}

FeatureVector build_feature_vector(const std::vector<SliceResult>& results) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : results)
        if (r.retained) pairs.emplace_back(r.left_rate, r.right_rate);
    const int m = static_cast<int>(pairs.size());
    if (m == 0) throw DataError("build_feature_vector: no retained slices");

    FeatureVector v{};
    if (m > kFeaturePairs) {
        const auto picks = region_sample_indices(m);
        for (int r = 0; r < kFeaturePairs; ++r) {
            v[2 * r] = pairs[picks[r]].first;
            v[2 * r + 1] = pairs[picks[r]].second;
        }
        return v;
    }

    double avg_left = 0.0, avg_right = 0.0;
    for (const auto& [l, rr] : pairs) {
        avg_left += l;
        avg_right += rr;
    }
    avg_left /= m;
    avg_right /= m;
    for (int r = 0; r < kFeaturePairs; ++r) {
        const auto& [l, rr] = r < m ? pairs[r] : std::pair<double, double>{avg_left, avg_right};
        v[2 * r] = l;
        v[2 * r + 1] = rr;
    }
    return v;
}

void write_feature_csv(const std::filesystem::path& path, const std::vector<FeatureRow>& rows) {
    if (rows.empty()) throw DataError("write_feature_csv: no rows");
    const bool labeled = rows.front().label.has_value();
    std::string out = "patient_id";
    for (int i = 0; i < kFeatureDim; ++i) out += ",f" + std::to_string(i);
    if (labeled) out += ",label";
    out += "\n";
    for (const auto& row : rows) {
        if (row.label.has_value() != labeled)
            throw DataError("write_feature_csv: mixed labeled and unlabeled rows");
        out += row.patient_id;
        for (double v : row.values) out += "," + format_double(v);
        if (labeled) out += "," + std::to_string(*row.label);
        out += "\n";
    }
    write_text_file(path, out);
}

std::vector<FeatureRow> read_feature_csv(const std::filesystem::path& path) {
    const auto rows = read_csv(path);
    if (rows.size() < 2)
        throw DataError("feature CSV has no data rows: " + path.string());
    const auto& header = rows.front();
    const std::size_t unlabeled_width = 1 + kFeatureDim;
    bool labeled;
    if (header.size() == unlabeled_width && header[0] == "patient_id") {
        labeled = false;
    } else if (header.size() == unlabeled_width + 1 && header[0] == "patient_id" &&
               header.back() == "label") {
        labeled = true;
    } else {
        throw DataError("bad feature CSV header in " + path.string());
    }
    for (int i = 0; i < kFeatureDim; ++i)
        if (header[1 + i] != "f" + std::to_string(i))
            throw DataError("bad feature CSV header in " + path.string());

    std::vector<FeatureRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() != header.size())
            throw DataError("feature CSV row " + std::to_string(r) + " has wrong arity in " +
                            path.string());
        FeatureRow row;
        row.patient_id = cells[0];
        for (int i = 0; i < kFeatureDim; ++i)
            row.values[i] = parse_double(cells[1 + i], path.string());
        if (labeled) {
            const int label = parse_int(cells.back(), path.string());
            if (label < 1 || label > 4)
                throw DataError("label out of range in " + path.string());
            row.label = label;
        }
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace ctsev
