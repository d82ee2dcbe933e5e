#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "ctsev/errors.hpp"
#include "ctsev/metrics.hpp"
#include "ctsev/rng.hpp"

using namespace ctsev;

namespace {

ConfusionMatrix fixed_confusion() {
    // Rows true, columns predicted.
    ConfusionMatrix cm;
    cm.counts = {{{50, 10, 0, 0}, {8, 40, 12, 0}, {0, 10, 35, 15}, {0, 0, 5, 15}}};
    return cm;
}

} // namespace

TEST_CASE("confusion matrix counts pairs") {
    const std::vector<int> y_true = {1, 1, 2, 3, 4, 4, 2, 3};
    const std::vector<int> y_pred = {1, 2, 2, 3, 4, 3, 2, 1};
    const ConfusionMatrix cm = confusion_matrix(y_true, y_pred);
    CHECK(cm.total() == 8);
    CHECK(cm.counts[0][0] == 1);
    CHECK(cm.counts[0][1] == 1);
    CHECK(cm.counts[1][1] == 2);
    CHECK(cm.counts[2][2] == 1);
    CHECK(cm.counts[2][0] == 1);
    CHECK(cm.counts[3][3] == 1);
    CHECK(cm.counts[3][2] == 1);

    CHECK_THROWS_AS((void)confusion_matrix({1, 2}, {1}), DataError);
    CHECK_THROWS_AS((void)confusion_matrix({1, 5}, {1, 1}), DataError);
    CHECK_THROWS_AS((void)confusion_matrix({}, {}), DataError);
}

TEST_CASE("macro metrics match frozen hand-computed values") {
    const MetricsReport r = macro_metrics(fixed_confusion());

    const double precision[4] = {0.86206896551724133, 0.66666666666666663,
                                 0.67307692307692313, 0.5};
    const double recall[4] = {0.83333333333333337, 0.66666666666666663,
                              0.58333333333333337, 0.75};
    const double f1[4] = {0.84745762711864403, 0.66666666666666663, 0.62500000000000011,
                          0.59999999999999998};
    for (int c = 0; c < 4; ++c) {
        CHECK(r.precision[c] == doctest::Approx(precision[c]).epsilon(1e-14));
        CHECK(r.recall[c] == doctest::Approx(recall[c]).epsilon(1e-14));
        CHECK(r.f1[c] == doctest::Approx(f1[c]).epsilon(1e-14));
    }
    CHECK(r.macro_precision == doctest::Approx(0.67545313881520785).epsilon(1e-14));
    CHECK(r.macro_recall == doctest::Approx(0.70833333333333337).epsilon(1e-14));
    CHECK(r.macro_f1 == doctest::Approx(0.68478107344632766).epsilon(1e-14));
    CHECK(r.macro_f1_pr == doctest::Approx(0.69150260239873274).epsilon(1e-14));
}

TEST_CASE("perfect and absent classes") {
    ConfusionMatrix cm;
    cm.counts[0][0] = 10;
    cm.counts[1][1] = 5;
    const MetricsReport r = macro_metrics(cm);
    CHECK(r.precision[0] == 1.0);
    CHECK(r.recall[0] == 1.0);
    CHECK(r.f1[0] == 1.0);
    // Classes 3 and 4 never occur: 0/0 counts as 0.
    CHECK(r.precision[2] == 0.0);
    CHECK(r.recall[2] == 0.0);
    CHECK(r.f1[2] == 0.0);
    CHECK(r.macro_f1 == doctest::Approx(0.5));

    // A present class that is never predicted still has zero precision.
    ConfusionMatrix cm2;
    cm2.counts[1][0] = 7; // true 2 always predicted 1
    const MetricsReport r2 = macro_metrics(cm2);
    CHECK(r2.recall[1] == 0.0);
    CHECK(r2.precision[1] == 0.0);
    CHECK(r2.f1[1] == 0.0);
}

TEST_CASE("metrics are invariant under sample permutation") {
    Rng rng(55);
    std::vector<int> y_true, y_pred;
    for (int i = 0; i < 200; ++i) {
        y_true.push_back(1 + static_cast<int>(rng.below(4)));
        y_pred.push_back(1 + static_cast<int>(rng.below(4)));
    }
    const MetricsReport a = macro_metrics(confusion_matrix(y_true, y_pred));

    std::vector<int> order(200);
    for (int i = 0; i < 200; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = 199; i > 0; --i)
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
    std::vector<int> t2, p2;
    for (int i : order) {
        t2.push_back(y_true[static_cast<std::size_t>(i)]);
        p2.push_back(y_pred[static_cast<std::size_t>(i)]);
    }
    const MetricsReport b = macro_metrics(confusion_matrix(t2, p2));
    CHECK(a.macro_f1 == b.macro_f1);
    CHECK(a.macro_f1_pr == b.macro_f1_pr);
    CHECK(a.macro_precision == b.macro_precision);
}

TEST_CASE("stratified folds partition each class proportionally") {
    std::vector<int> labels;
    for (int c = 1; c <= 4; ++c)
        for (int i = 0; i < 25; ++i) labels.push_back(c);

    const auto folds = stratified_k_fold(labels, 5, 42);
    REQUIRE(folds.size() == 5);

    std::set<int> seen;
    for (const auto& fold : folds) {
        CHECK(fold.test.size() == 20);
        CHECK(fold.train.size() == 80);
        int per_class[4] = {0, 0, 0, 0};
        for (int i : fold.test) {
            CHECK(seen.insert(i).second); // disjoint test sets
            ++per_class[labels[static_cast<std::size_t>(i)] - 1];
        }
        for (int c = 0; c < 4; ++c) CHECK(per_class[c] == 5);

        // train = complement of test.
        std::set<int> test_set(fold.test.begin(), fold.test.end());
        for (int i : fold.train) CHECK(!test_set.count(i));
        CHECK(fold.train.size() + fold.test.size() == labels.size());
    }
    CHECK(seen.size() == labels.size()); // covering
}

TEST_CASE("stratified folds stay within one sample of proportional") {
    Rng rng(77);
    std::vector<int> labels;
    for (int i = 0; i < 103; ++i) labels.push_back(1 + static_cast<int>(rng.below(4)));
    int class_total[4] = {0, 0, 0, 0};
    for (int c : labels) ++class_total[c - 1];

    const auto folds = stratified_k_fold(labels, 4, 9);
    REQUIRE(folds.size() == 4);
    std::set<int> seen;
    for (const auto& fold : folds) {
        int per_class[4] = {0, 0, 0, 0};
        for (int i : fold.test) {
            CHECK(seen.insert(i).second);
            ++per_class[labels[static_cast<std::size_t>(i)] - 1];
        }
        for (int c = 0; c < 4; ++c) {
            const int lo = class_total[c] / 4;
            CHECK(per_class[c] >= lo);
            CHECK(per_class[c] <= lo + 1);
        }
    }
    CHECK(seen.size() == labels.size());
}

TEST_CASE("stratified folds are deterministic in the seed") {
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(1 + i % 4);
    const auto a = stratified_k_fold(labels, 4, 7);
    const auto b = stratified_k_fold(labels, 4, 7);
    const auto c = stratified_k_fold(labels, 4, 8);
    REQUIRE(a.size() == b.size());
    bool all_equal_seed7 = true, differs_seed8 = false;
    for (std::size_t f = 0; f < a.size(); ++f) {
        all_equal_seed7 = all_equal_seed7 && a[f].test == b[f].test && a[f].train == b[f].train;
        differs_seed8 = differs_seed8 || a[f].test != c[f].test;
    }
    CHECK(all_equal_seed7);
    CHECK(differs_seed8);
}

TEST_CASE("tiny classes land in exactly one test fold") {
    // One sample of class 4, three folds.
    const std::vector<int> labels = {1, 1, 1, 1, 1, 1, 4};
    const auto folds = stratified_k_fold(labels, 3, 1);
    int appearances = 0;
    for (const auto& fold : folds)
        appearances += static_cast<int>(std::count(fold.test.begin(), fold.test.end(), 6));
    CHECK(appearances == 1);
}

TEST_CASE("k-fold input validation") {
    CHECK_THROWS_AS((void)stratified_k_fold({1, 2, 3}, 1, 0), DataError);
    CHECK_THROWS_AS((void)stratified_k_fold({}, 2, 0), DataError);
    CHECK_THROWS_AS((void)stratified_k_fold({1, 9}, 2, 0), DataError);
}

TEST_CASE("report formatting carries the expected structure") {
    const MetricsReport r = macro_metrics(fixed_confusion());
    const std::string table = format_metrics_table(r);
    for (const char* needle : {"Precision", "Recall", "F1 score", "Mild", "Moderate",
                               "Severe", "Critical", "Macro"})
        CHECK(table.find(needle) != std::string::npos);

    const std::string csv = format_metrics_csv(r);
    CHECK(csv.find("class,precision,recall,f1") != std::string::npos);
    CHECK(csv.find("macro,") != std::string::npos);
    CHECK(csv.find("macro_f1_pr") != std::string::npos);

    const std::string confusion = format_confusion_csv(fixed_confusion());
    CHECK(confusion.find("50") != std::string::npos);
    // One header plus four data rows.
    CHECK(std::count(confusion.begin(), confusion.end(), '\n') == 5);
}
