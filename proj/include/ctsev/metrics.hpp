#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ctsev {

/// Rows are true classes 1..4, columns predicted classes.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, 4>, 4> counts{};

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (const auto& row : counts)
            for (auto c : row) t += c;
        return t;
    }
};

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred);

/// Per-class and macro precision/recall/F1 with the 0/0 := 0 convention.
/// macro_f1 is the mean of per-class F1; macro_f1_pr is the harmonic mean of
/// macro precision and macro recall (the two readings of "macro F1").
struct MetricsReport {
    std::array<double, 4> precision{};
    std::array<double, 4> recall{};
    std::array<double, 4> f1{};
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double macro_f1_pr = 0.0;
};

MetricsReport macro_metrics(const ConfusionMatrix& cm);

/// One cross-validation split as dataset indices.
struct FoldSplit {
    std::vector<int> train;
    std::vector<int> test;
};

/// Stratified k-fold: per-class shuffled round-robin dealing, so per-fold
/// class counts are within one sample of proportional. Classes with fewer
/// than k samples degrade to best effort (their samples still land in some
/// fold's test set exactly once).
std::vector<FoldSplit> stratified_k_fold(const std::vector<int>& labels, int k,
                                         std::uint64_t seed);

/// Human-readable table with Precision / Recall / F1 score rows per class
/// plus the macro column.
std::string format_metrics_table(const MetricsReport& report);
std::string format_confusion_csv(const ConfusionMatrix& cm);
std::string format_metrics_csv(const MetricsReport& report);

} // namespace ctsev
