#include "ctsev/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "ctsev/csv.hpp"
#include "ctsev/errors.hpp"
#include "ctsev/rng.hpp"

namespace ctsev {

ConfusionMatrix confusion_matrix(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred) {
    if (y_true.empty() || y_true.size() != y_pred.size())
        throw DataError("confusion_matrix: needs aligned, nonempty label lists");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 1 || y_true[i] > 4 || y_pred[i] < 1 || y_pred[i] > 4)
            throw DataError("confusion_matrix: label outside 1..4");
        ++cm.counts[y_true[i] - 1][y_pred[i] - 1];
    }
    return cm;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

} // namespace

MetricsReport macro_metrics(const ConfusionMatrix& cm) {
    MetricsReport rep;
    for (int c = 0; c < 4; ++c) {
        std::uint64_t col = 0, row = 0;
        for (int o = 0; o < 4; ++o) {
            col += cm.counts[o][c];
            row += cm.counts[c][o];
        }
        rep.precision[c] = ratio(cm.counts[c][c], col);
        rep.recall[c] = ratio(cm.counts[c][c], row);
        rep.f1[c] = f1_of(rep.precision[c], rep.recall[c]);
        rep.macro_precision += rep.precision[c] / 4.0;
        rep.macro_recall += rep.recall[c] / 4.0;
        rep.macro_f1 += rep.f1[c] / 4.0;
    }
    rep.macro_f1_pr = f1_of(rep.macro_precision, rep.macro_recall);
    return rep;
}

std::vector<FoldSplit> stratified_k_fold(const std::vector<int>& labels, int k,
                                         std::uint64_t seed) {
    const int n = static_cast<int>(labels.size());
    if (k < 2) throw DataError("stratified_k_fold: k must be >= 2");
    if (k > n) throw DataError("stratified_k_fold: k exceeds sample count");
    for (int label : labels)
        if (label < 1 || label > 4) throw DataError("stratified_k_fold: label outside 1..4");

    std::array<std::vector<int>, 4> by_class;
    for (int i = 0; i < n; ++i) by_class[labels[i] - 1].push_back(i);

    Rng rng(seed);
    std::vector<std::vector<int>> fold_members(static_cast<std::size_t>(k));
    for (int c = 0; c < 4; ++c) {
        auto& idx = by_class[c];
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.below(i)]);
        for (std::size_t j = 0; j < idx.size(); ++j)
            fold_members[(c + j) % k].push_back(idx[j]);
    }

    std::vector<FoldSplit> splits(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        auto& split = splits[f];
        split.test = fold_members[f];
        std::sort(split.test.begin(), split.test.end());
        for (int o = 0; o < k; ++o)
            if (o != f)
                split.train.insert(split.train.end(), fold_members[o].begin(),
                                   fold_members[o].end());
        std::sort(split.train.begin(), split.train.end());
    }
    return splits;
}

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

std::string format_metrics_table(const MetricsReport& rep) {
    static const char* kHeader = "            Mild    Moderate  Severe  Critical  Macro\n";
    std::string out = kHeader;
    const auto row = [](const char* name, const std::array<double, 4>& vals, double macro) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-10s  %-8s%-10s%-8s%-10s%s\n", name,
                      fixed4(vals[0]).c_str(), fixed4(vals[1]).c_str(), fixed4(vals[2]).c_str(),
                      fixed4(vals[3]).c_str(), fixed4(macro).c_str());
        return std::string(buf);
    };
    out += row("Precision", rep.precision, rep.macro_precision);
    out += row("Recall", rep.recall, rep.macro_recall);
    out += row("F1 score", rep.f1, rep.macro_f1);
    out += "\nmacro F1 (mean of per-class F1): " + fixed4(rep.macro_f1) + "\n";
    out += "macro F1 (harmonic of macro precision/recall): " + fixed4(rep.macro_f1_pr) + "\n";
    return out;
}

std::string format_confusion_csv(const ConfusionMatrix& cm) {
    std::string out = "true\\pred,1,2,3,4\n";
    for (int t = 0; t < 4; ++t) {
        out += std::to_string(t + 1);
        for (int p = 0; p < 4; ++p) out += "," + std::to_string(cm.counts[t][p]);
        out += "\n";
    }
    return out;
}

std::string format_metrics_csv(const MetricsReport& rep) {
    std::string out = "class,precision,recall,f1\n";
    for (int c = 0; c < 4; ++c)
        out += std::to_string(c + 1) + "," + format_double(rep.precision[c]) + "," +
               format_double(rep.recall[c]) + "," + format_double(rep.f1[c]) + "\n";
    out += "macro," + format_double(rep.macro_precision) + "," +
           format_double(rep.macro_recall) + "," + format_double(rep.macro_f1) + "\n";
    out += "macro_f1_pr,,," + format_double(rep.macro_f1_pr) + "\n";
    return out;
}

} // namespace ctsev
