#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctsev/classifiers.hpp"
#include "ctsev/infection.hpp"
#include "ctsev/lung.hpp"
#include "ctsev/phantom.hpp"

namespace ctsev {

/// The cmd_* functions implement the CLI subcommands. They throw DataError
/// for bad inputs and InternalError for invariant violations; the CLI front
/// end maps those to exit codes 2 and 3. Every command writes a key=value
/// echo of its resolved configuration next to its primary output (same path
/// with a .config extension). Thread counts are excluded from the echo so
/// reruns at any --threads setting produce identical artifacts.

struct SegmentOptions {
    std::filesystem::path scan_dir;
    std::filesystem::path out_rates;     // per-slice rates CSV
    std::filesystem::path out_mask_dir;  // optional: infection masks as PNG
    std::filesystem::path lung_mask_dir; // optional: external lung masks
    double air_threshold = 0.35;         // classical fallback segmenter
    GateParams gate;
    InfectionParams infection;
    std::filesystem::path debug_dir; // optional: intermediates per retained slice
    int threads = 0;
};
void cmd_segment(const SegmentOptions& opt);

struct FeaturizeOptions {
    std::vector<std::filesystem::path> rates_csvs; // mode A: precomputed rates
    std::vector<std::filesystem::path> scan_dirs;  // mode B: raw scans
    std::filesystem::path lung_mask_root;          // mode B: <root>/<scan id>/
    double air_threshold = 0.35;
    GateParams gate;
    InfectionParams infection;
    std::filesystem::path labels_csv; // optional: CSV with id and label columns
    std::filesystem::path out_features;
    int threads = 0;
};
void cmd_featurize(const FeaturizeOptions& opt);

struct TrainOptions {
    std::filesystem::path features_csv; // must carry labels
    std::filesystem::path out_model;
    std::string model_kind = "ensemble"; // ensemble|gboost|ert|svm|knn|logreg
    std::uint64_t seed = 0;
    GbParams gboost;
    ErtParams ert;
    SvmParams svm;
    KnnParams knn;
    LogregParams logreg;
    int threads = 0;
};
void cmd_train(const TrainOptions& opt);

struct PredictOptions {
    std::filesystem::path features_csv;
    std::filesystem::path model_path;
    std::filesystem::path out_predictions; // patient_id,predicted
};
void cmd_predict(const PredictOptions& opt);

struct EvaluateOptions {
    std::filesystem::path features_csv; // must carry labels
    std::filesystem::path model_path;        // either a model ...
    std::filesystem::path predictions_csv;   // ... or precomputed predictions
    std::filesystem::path out_dir; // receives metrics.txt, metrics.csv, confusion.csv
};
void cmd_evaluate(const EvaluateOptions& opt);

struct WamOptions {
    std::filesystem::path features_csv;
    std::filesystem::path out_csv; // patient_id,mean_score,wam_class
};
void cmd_wam(const WamOptions& opt);

struct PhantomOptions {
    std::filesystem::path out_dir;
    int per_class = 50;
    std::uint64_t seed = 0;
    PhantomSpec base; // severity/involvement/seed are overridden per scan
    int threads = 0;
};
void cmd_phantom(const PhantomOptions& opt);

} // namespace ctsev
