#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "ctsev/binio.hpp"
#include "ctsev/features.hpp"

namespace ctsev {

/// Labeled feature vectors; labels are severity classes 1..4.
struct Dataset {
    std::vector<FeatureVector> X;
    std::vector<int> y;

    std::size_t size() const { return X.size(); }

    void validate() const {
        if (X.empty() || X.size() != y.size())
            throw DataError("Dataset: needs aligned, nonempty features and labels");
        for (int label : y)
            if (label < 1 || label > 4) throw DataError("Dataset: label outside 1..4");
    }
};

/// Class scores are softmax probabilities when `probabilistic`, otherwise
/// raw vote shares or margins.
struct Prediction {
    int severity = 1;
    std::array<double, 4> scores{};
    bool probabilistic = false;
};

class Model {
public:
    virtual ~Model() = default;
    virtual std::string kind() const = 0;
    virtual Prediction predict(const FeatureVector& x) const = 0;
    virtual void write_payload(BinaryWriter& out) const = 0;
};

} // namespace ctsev
