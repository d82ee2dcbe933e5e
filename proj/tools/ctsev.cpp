#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctsev/commands.hpp"
#include "ctsev/errors.hpp"

namespace {

using namespace ctsev;

void add_gate_flags(CLI::App* cmd, GateParams& gate) {
    cmd->add_option("--gate-min-area", gate.min_mask_area,
                    "Minimum lung mask area at 512x512 scale");
    cmd->add_option("--gate-large-fraction", gate.large_area_fraction,
                    "Image-area fraction that always retains a slice");
}

void add_infection_flags(CLI::App* cmd, InfectionParams& p) {
    cmd->add_option("--hyper-c", p.hyper_c, "Hyperbolization constant c");
    cmd->add_option("--sigma", p.gaussian_sigma, "Gaussian smoothing sigma");
    cmd->add_option("--band-lo", p.band_lo, "Intensity band lower bound");
    cmd->add_option("--band-hi", p.band_hi, "Intensity band upper bound");
    cmd->add_option("--noise-min-area", p.noise_min_area,
                    "Minimum component area after opening");
    cmd->add_option("--vessel-min-area", p.vessel_min_area,
                    "Minimum component area of the vessel mask");
    cmd->add_option("--otsu-guard", p.otsu_guard,
                    "Between-class variance below which a histogram counts as constant");
}

int run(int argc, char** argv) {
    CLI::App app{"CT severity pipeline: infection segmentation, features, WAM and "
                 "ensemble classification"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value file (flags win)");
    app.get_config_formatter_base()->comment('#');

    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = hardware)")
        ->envname("CTSEV_THREADS");

    SegmentOptions seg;
    auto* seg_cmd = app.add_subcommand("segment", "Segment one scan and write per-slice rates");
    seg_cmd->add_option("--scan", seg.scan_dir, "Scan directory of PNG/PGM slices")->required();
    seg_cmd->add_option("--out-rates", seg.out_rates, "Output rates CSV")->required();
    seg_cmd->add_option("--out-masks", seg.out_mask_dir, "Directory for infection mask PNGs");
    seg_cmd->add_option("--lung-masks", seg.lung_mask_dir, "External lung mask directory");
    seg_cmd->add_option("--air-threshold", seg.air_threshold,
                        "Fallback segmenter air intensity cutoff");
    seg_cmd->add_option("--debug-dir", seg.debug_dir, "Dump intermediates per retained slice");
    add_gate_flags(seg_cmd, seg.gate);
    add_infection_flags(seg_cmd, seg.infection);

    FeaturizeOptions feat;
    auto* feat_cmd = app.add_subcommand("featurize", "Build the 80-column feature CSV");
    feat_cmd->add_option("--rates", feat.rates_csvs, "Rates CSVs, one per scan");
    feat_cmd->add_option("--scans", feat.scan_dirs, "Scan directories, one per scan");
    feat_cmd->add_option("--lung-mask-root", feat.lung_mask_root,
                         "Root holding <scan id>/ lung mask directories");
    feat_cmd->add_option("--air-threshold", feat.air_threshold,
                         "Fallback segmenter air intensity cutoff");
    feat_cmd->add_option("--labels", feat.labels_csv, "CSV with id and label columns");
    feat_cmd->add_option("--out", feat.out_features, "Output feature CSV")->required();
    add_gate_flags(feat_cmd, feat.gate);
    add_infection_flags(feat_cmd, feat.infection);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train a classifier on a labeled feature CSV");
    train_cmd->add_option("--features", train.features_csv, "Labeled feature CSV")->required();
    train_cmd->add_option("--out", train.out_model, "Output model file")->required();
    train_cmd->add_option("--model", train.model_kind,
                          "ensemble|gboost|ert|svm|knn|logreg");
    train_cmd->add_option("--seed", train.seed, "Training seed");
    train_cmd->add_option("--gb-rounds", train.gboost.n_rounds, "Boosting rounds");
    train_cmd->add_option("--gb-lr", train.gboost.learning_rate, "Boosting learning rate");
    train_cmd->add_option("--gb-depth", train.gboost.max_depth, "Boosting tree depth");
    train_cmd->add_option("--ert-trees", train.ert.n_trees, "Extremely randomized trees");
    train_cmd->add_option("--ert-k", train.ert.k_features, "Random features per split");
    train_cmd->add_option("--svm-gamma", train.svm.gamma, "RBF kernel gamma");
    train_cmd->add_option("--svm-c", train.svm.C, "SVM box constraint C");
    train_cmd->add_option("--svm-tol", train.svm.tol, "SMO KKT tolerance");
    train_cmd->add_option("--knn-k", train.knn.k, "Nearest neighbours");
    train_cmd->add_option("--logreg-lr", train.logreg.learning_rate,
                          "Logistic regression learning rate");
    train_cmd->add_option("--logreg-epochs", train.logreg.epochs,
                          "Logistic regression epochs");
    const std::vector<std::string> kinds{"ensemble", "gboost", "ert", "svm", "knn", "logreg"};
    train_cmd->get_option("--model")->check(CLI::IsMember(kinds));

    PredictOptions pred;
    auto* pred_cmd = app.add_subcommand("predict", "Predict severity classes for a feature CSV");
    pred_cmd->add_option("--features", pred.features_csv, "Feature CSV")->required();
    pred_cmd->add_option("--model", pred.model_path, "Model file")->required();
    pred_cmd->add_option("--out", pred.out_predictions, "Output predictions CSV")->required();

    EvaluateOptions eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a model or predictions CSV");
    eval_cmd->add_option("--features", eval.features_csv, "Labeled feature CSV")->required();
    eval_cmd->add_option("--model", eval.model_path, "Model file");
    eval_cmd->add_option("--predictions", eval.predictions_csv, "Predictions CSV");
    eval_cmd->add_option("--out-dir", eval.out_dir, "Output directory")->required();

    WamOptions wam;
    auto* wam_cmd = app.add_subcommand("wam", "Weighted average method over a feature CSV");
    wam_cmd->add_option("--features", wam.features_csv, "Feature CSV")->required();
    wam_cmd->add_option("--out", wam.out_csv, "Output CSV")->required();

    PhantomOptions phantom;
    auto* phantom_cmd = app.add_subcommand("phantom", "Generate a synthetic phantom corpus");
    phantom_cmd->add_option("--out-dir", phantom.out_dir, "Corpus directory")->required();
    phantom_cmd->add_option("--per-class", phantom.per_class, "Scans per severity class");
    phantom_cmd->add_option("--seed", phantom.seed, "Corpus seed");
    phantom_cmd->add_option("--slices", phantom.base.n_slices, "Slices per scan");
    phantom_cmd->add_option("--width", phantom.base.width, "Slice width");
    phantom_cmd->add_option("--height", phantom.base.height, "Slice height");
    phantom_cmd->add_option("--vessel-density", phantom.base.vessel_density,
                            "Vessel count multiplier");
    phantom_cmd->add_option("--noise-sigma", phantom.base.noise_sigma, "Pixel noise sigma");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    seg.threads = feat.threads = train.threads = phantom.threads = threads;
    if (seg_cmd->parsed()) cmd_segment(seg);
    if (feat_cmd->parsed()) cmd_featurize(feat);
    if (train_cmd->parsed()) cmd_train(train);
    if (pred_cmd->parsed()) cmd_predict(pred);
    if (eval_cmd->parsed()) cmd_evaluate(eval);
    if (wam_cmd->parsed()) cmd_wam(wam);
    if (phantom_cmd->parsed()) cmd_phantom(phantom);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const InternalError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
}
